from .runstore import MissingResultsError, RunStore

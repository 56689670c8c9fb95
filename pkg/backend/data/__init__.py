from .loader import (
    CsvSchema,
    Dataset,
    DatasetError,
    RawDataset,
    load_csv,
    load_dataset,
    one_hot_encode,
    zscore_normalize,
)
from .synthetic import make_two_blobs

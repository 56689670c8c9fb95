import argparse
import os
import sys

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from backend.data import make_two_blobs


if __name__ == "__main__":
    parser = argparse.ArgumentParser(
        description="Write the two-blob synthetic regression benchmark as CSV."
    )
    parser.add_argument("--output_file_path", type=str, required=True)
    parser.add_argument("--n", type=int, default=200)
    parser.add_argument("--d", type=int, default=5)
    parser.add_argument("--separation", type=float, default=10.0)
    parser.add_argument("--spread", type=float, default=0.4)
    parser.add_argument("--noise", type=float, default=0.4)
    parser.add_argument("--weight", type=float, default=0.9)
    parser.add_argument("--seed", type=int, default=0)

    args = parser.parse_args()

    dataset = make_two_blobs(
        n=args.n,
        d=args.d,
        separation=args.separation,
        spread=args.spread,
        noise=args.noise,
        weight=args.weight,
        seed=args.seed,
    )
    os.makedirs(os.path.dirname(os.path.abspath(args.output_file_path)), exist_ok=True)
    dataset.to_frame(target="y").to_csv(args.output_file_path, index=False, float_format="%.12g")
    print(f"Wrote {dataset.N} samples with {dataset.d} features to {args.output_file_path}")

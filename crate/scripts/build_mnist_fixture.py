#!/usr/bin/env python3
"""Rebuild data/mnist/*.gz from the `mnist` npm package (v1.1.0).

That package ships 10,000 MNIST digits as per-class JSON arrays of
gray/255 rounded to three decimals; round(x * 255) recovers the original
byte exactly. Each class is split 80/20 (first 80% of records -> train)
and written out as standard big-endian IDX3/IDX1 files, gzip-compressed.

usage: build_mnist_fixture.py <path/to/package/src/digits> <out_dir>
"""
import gzip
import json
import struct
import sys
from pathlib import Path


def write_idx(path, images, labels, prefix):
    with gzip.GzipFile(path / f"{prefix}-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))
    with gzip.GzipFile(path / f"{prefix}-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))


def main():
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    train, test = ([], []), ([], [])
    for digit in range(10):
        data = json.loads((src / f"{digit}.json").read_text())["data"]
        records = [
            [round(v * 255) for v in data[i : i + 784]] for i in range(0, len(data), 784)
        ]
        cut = len(records) * 4 // 5
        for idx, rec in enumerate(records):
            bucket = train if idx < cut else test
            bucket[0].append(rec)
            bucket[1].append(digit)
    write_idx(out, *train, "train")
    write_idx(out, *test, "t10k")
    print(f"train={len(train[0])} test={len(test[0])}")


if __name__ == "__main__":
    main()

"""Byte-level writers for the file formats the loaders read."""
import struct

import numpy as np


def idx_bytes(array, code=0x08):
    array = np.asarray(array)
    dtype = {0x08: "u1", 0x09: "i1", 0x0B: ">i2", 0x0C: ">i4", 0x0D: ">f4", 0x0E: ">f8"}[code]
    header = bytes([0, 0, code, array.ndim]) + struct.pack(f">{array.ndim}I", *array.shape)
    return header + array.astype(dtype).tobytes()


def pnm_bytes(image, comment=None):
    image = np.asarray(image, dtype=np.uint8)
    magic = b"P6" if image.ndim == 3 else b"P5"
    head = magic + b"\n"
    if comment:
        head += b"# " + comment + b"\n"
    head += f"{image.shape[1]} {image.shape[0]}\n255\n".encode()
    return head + image.tobytes()

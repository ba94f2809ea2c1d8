"""Hand-assembled IDX and PGM byte strings, valid and malformed."""

IDX_IMAGES_ONE = bytes.fromhex("00000803 00000001 00000002 00000002") + bytes([0, 255, 255, 0])
IDX_LABELS_FIVE = bytes.fromhex("00000801 00000001") + bytes([5])
IDX_LABELS_BAD_MAGIC = bytes.fromhex("00000803 00000001") + bytes([5])
IDX_IMAGES_TWO = bytes.fromhex("00000803 00000002 00000002 00000002") + bytes(8)

PGM_P2 = b"P2\n2 2\n255\n0 255 255 0\n"
PGM_P5_WIDE = b"P5\n2 2\n65535\n" + bytes(8)
PGM_P5_SHORT = b"P5\n2 2\n255\n" + bytes(3)


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_bytes(data)
    return path

"""Quantize Repository - HDF1 필드 파일

HDF1 형식 (리틀 엔디안):
    32바이트 헤더: magic "HDF1", n_r u16, n_θ u16, L_r f64, r_origin f64, ħ f64
    이어서 n_r × n_θ 개 complex64 (행 우선, r 이 바깥 인덱스)
"""

from pathlib import Path

import numpy as np

from src.quantize.schemas import Grid, HalfDensityField
from src.shared.exceptions import ValidationException

MAGIC = b"HDF1"
HEADER_DTYPE = np.dtype(
    [
        ("magic", "S4"),
        ("n_r", "<u2"),
        ("n_theta", "<u2"),
        ("r_length", "<f8"),
        ("r_origin", "<f8"),
        ("hbar", "<f8"),
    ]
)


def encode_field(u: HalfDensityField) -> bytes:
    g = u.grid
    header = np.array([(MAGIC, g.n_r, g.n_theta, g.r_length, g.r_origin, g.hbar)], dtype=HEADER_DTYPE)
    body = np.ascontiguousarray(u.values, dtype="<c8")
    return header.tobytes() + body.tobytes()


def decode_field(data: bytes) -> HalfDensityField:
    if len(data) < HEADER_DTYPE.itemsize:
        raise ValidationException("field file shorter than its header", details={"bytes": len(data)})
    header = np.frombuffer(data[: HEADER_DTYPE.itemsize], dtype=HEADER_DTYPE)[0]
    if bytes(header["magic"]) != MAGIC:
        raise ValidationException("bad field magic", details={"magic": bytes(header["magic"])})
    grid = Grid(
        r_origin=float(header["r_origin"]),
        r_length=float(header["r_length"]),
        n_r=int(header["n_r"]),
        n_theta=int(header["n_theta"]),
        hbar=float(header["hbar"]),
    )
    expected = grid.size * np.dtype("<c8").itemsize
    body = data[HEADER_DTYPE.itemsize :]
    if len(body) != expected:
        raise ValidationException("field body size mismatch", details={"expected": expected, "got": len(body)})
    values = np.frombuffer(body, dtype="<c8").reshape(grid.shape).astype(complex)
    return HalfDensityField(grid=grid, values=values)


class FieldRepository:
    """디렉터리 기반 필드 저장소"""

    def __init__(self, root: Path | str):
        self.root = Path(root)

    def save(self, name: str, u: HalfDensityField) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / f"{name}.hdf1"
        path.write_bytes(encode_field(u))
        return path

    def load(self, name: str) -> HalfDensityField:
        path = self.root / f"{name}.hdf1"
        if not path.exists():
            raise ValidationException(f"no such field: {name}", details={"path": str(path)})
        return decode_field(path.read_bytes())

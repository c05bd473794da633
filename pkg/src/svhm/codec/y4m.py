"""Y4M (C420, 8-bit) and raw planar YUV420 readers/writers."""

from __future__ import annotations

import numpy as np

from .frames import Frame, downsample2, rgb_to_ycbcr, upsample2, ycbcr_to_rgb

_C420_TAGS = {"420", "420jpeg", "420mpeg2", "420paldv"}


class Y4MError(ValueError):
    pass


def _yuv_to_frame(y: np.ndarray, cb: np.ndarray, cr: np.ndarray, index: int) -> Frame:
    return ycbcr_to_rgb(
        y.astype(np.float64),
        upsample2(cb.astype(np.float64)),
        upsample2(cr.astype(np.float64)),
        index,
    )


def _frame_to_yuv(frame: Frame) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    y, cb, cr = rgb_to_ycbcr(frame)
    to8 = lambda p: np.clip(np.round(p), 0, 255).astype(np.uint8)
    return to8(y), to8(downsample2(cb)), to8(downsample2(cr))


def read_y4m(path) -> tuple[list[Frame], str]:
    """Parse a C420 8-bit Y4M file; returns (frames, frame-rate tag)."""
    with open(path, "rb") as f:
        header = bytearray()
        while True:
            c = f.read(1)
            if not c:
                raise Y4MError(f"{path}: truncated Y4M header")
            if c == b"\n":
                break
            header += c
        fields = header.decode("ascii", "replace").split()
        if not fields or fields[0] != "YUV4MPEG2":
            raise Y4MError(f"{path}: not a YUV4MPEG2 file")
        width = height = None
        rate = "25:1"
        for tok in fields[1:]:
            if tok.startswith("W"):
                width = int(tok[1:])
            elif tok.startswith("H"):
                height = int(tok[1:])
            elif tok.startswith("F"):
                rate = tok[1:]
            elif tok.startswith("C"):
                if tok[1:] not in _C420_TAGS:
                    raise Y4MError(f"{path}: unsupported colorspace {tok}")
        if width is None or height is None:
            raise Y4MError(f"{path}: missing geometry in Y4M header")
        if width % 2 or height % 2:
            raise Y4MError(f"{path}: 4:2:0 needs even dimensions")

        frames = []
        ysize = width * height
        csize = ysize // 4
        while True:
            line = f.readline()
            if not line:
                break
            if not line.startswith(b"FRAME"):
                raise Y4MError(f"{path}: malformed frame marker")
            buf = f.read(ysize + 2 * csize)
            if len(buf) != ysize + 2 * csize:
                raise Y4MError(f"{path}: truncated frame {len(frames)}")
            y = np.frombuffer(buf, dtype=np.uint8, count=ysize).reshape(height, width)
            cb = np.frombuffer(buf, dtype=np.uint8, count=csize, offset=ysize).reshape(
                height // 2, width // 2
            )
            cr = np.frombuffer(
                buf, dtype=np.uint8, count=csize, offset=ysize + csize
            ).reshape(height // 2, width // 2)
            frames.append(_yuv_to_frame(y, cb, cr, len(frames)))
        return frames, rate


def write_y4m(path, frames: list[Frame], rate: str = "25:1") -> None:
    if not frames:
        raise Y4MError("cannot write an empty Y4M file")
    w, h = frames[0].width, frames[0].height
    if w % 2 or h % 2:
        raise Y4MError("4:2:0 needs even dimensions")
    with open(path, "wb") as f:
        f.write(f"YUV4MPEG2 W{w} H{h} F{rate} Ip A1:1 C420jpeg\n".encode("ascii"))
        for fr in frames:
            y, cb, cr = _frame_to_yuv(fr)
            f.write(b"FRAME\n")
            f.write(y.tobytes())
            f.write(cb.tobytes())
            f.write(cr.tobytes())


def read_yuv420(path, width: int, height: int) -> list[Frame]:
    """Raw planar YUV420 with explicit geometry."""
    if width % 2 or height % 2:
        raise Y4MError("4:2:0 needs even dimensions")
    ysize = width * height
    csize = ysize // 4
    fsize = ysize + 2 * csize
    frames = []
    with open(path, "rb") as f:
        data = f.read()
    if len(data) % fsize:
        raise Y4MError(f"{path}: size {len(data)} is not a multiple of frame size {fsize}")
    for t in range(len(data) // fsize):
        off = t * fsize
        y = np.frombuffer(data, np.uint8, ysize, off).reshape(height, width)
        cb = np.frombuffer(data, np.uint8, csize, off + ysize).reshape(height // 2, width // 2)
        cr = np.frombuffer(data, np.uint8, csize, off + ysize + csize).reshape(
            height // 2, width // 2
        )
        frames.append(_yuv_to_frame(y, cb, cr, t))
    return frames

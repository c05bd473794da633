"""Scalable bitstream container with per-frame, per-layer sub-streams.

Layout (all integers little-endian):

    magic  b"SVHM"
    u8     version (1)
    u16    width, u16 height
    u32    frame count
    u8     gop, u8 quality, u8 block, u8 search
    u8     fusion weight quantized as round(w * 255)
    per frame, four u32-length-prefixed sub-streams:
        base_motion, base_signal, enh_motion, enh_context

Enhancement sub-streams may be empty (zero length); dropping them never
touches base-layer decodability.
"""

from __future__ import annotations

from dataclasses import dataclass, field

_MAGIC = b"SVHM"
_VERSION = 1


class ContainerError(ValueError):
    pass


@dataclass
class FrameRecord:
    base_motion: bytes = b""
    base_signal: bytes = b""
    enh_motion: bytes = b""
    enh_context: bytes = b""

    def substreams(self) -> tuple[bytes, bytes, bytes, bytes]:
        return self.base_motion, self.base_signal, self.enh_motion, self.enh_context

    def total_bits(self) -> int:
        return 8 * sum(len(s) for s in self.substreams())


@dataclass
class ScalableBitstream:
    width: int
    height: int
    gop: int
    quality: int
    block: int
    search: int
    fusion_weight_q: int          # quantized fusion weight, 0..255
    frames: list[FrameRecord] = field(default_factory=list)

    @property
    def fusion_weight(self) -> float:
        return self.fusion_weight_q / 255.0

    def serialize(self) -> bytes:
        out = bytearray(_MAGIC)
        out.append(_VERSION)
        out += self.width.to_bytes(2, "little")
        out += self.height.to_bytes(2, "little")
        out += len(self.frames).to_bytes(4, "little")
        out += bytes([self.gop, self.quality, self.block, self.search,
                      self.fusion_weight_q])
        for rec in self.frames:
            for sub in rec.substreams():
                out += len(sub).to_bytes(4, "little")
                out += sub
        return bytes(out)

    @classmethod
    def deserialize(cls, raw: bytes) -> "ScalableBitstream":
        if len(raw) < 18 or raw[:4] != _MAGIC:
            raise ContainerError("not a scalable bitstream (bad magic)")
        if raw[4] != _VERSION:
            raise ContainerError(f"unsupported container version {raw[4]}")
        width = int.from_bytes(raw[5:7], "little")
        height = int.from_bytes(raw[7:9], "little")
        count = int.from_bytes(raw[9:13], "little")
        gop, quality, block, search, fwq = raw[13:18]
        if width == 0 or height == 0 or gop == 0 or block == 0:
            raise ContainerError("degenerate container header")
        stream = cls(width, height, gop, quality, block, search, fwq)
        pos = 18
        for t in range(count):
            subs = []
            for _ in range(4):
                if pos + 4 > len(raw):
                    raise ContainerError(f"truncated at frame {t}")
                ln = int.from_bytes(raw[pos : pos + 4], "little")
                pos += 4
                if pos + ln > len(raw):
                    raise ContainerError(f"truncated at frame {t}")
                subs.append(raw[pos : pos + ln])
                pos += ln
            stream.frames.append(FrameRecord(*subs))
        if pos != len(raw):
            raise ContainerError(f"{len(raw) - pos} trailing bytes after payload")
        return stream

    def strip_enhancement(self) -> "ScalableBitstream":
        """Base-only copy: the scalability guarantee in container form."""
        return ScalableBitstream(
            self.width, self.height, self.gop, self.quality, self.block,
            self.search, self.fusion_weight_q,
            [FrameRecord(r.base_motion, r.base_signal) for r in self.frames],
        )

    def total_bits(self, layers: str = "base+enh") -> int:
        if layers == "base":
            return sum(8 * (len(r.base_motion) + len(r.base_signal)) for r in self.frames)
        return sum(r.total_bits() for r in self.frames)

"""Detector decisions"""

from enum import Enum


class Decision(Enum):
    """Outcome of a watermark detector

    H0: no watermark present, H1: watermark u present.
    """
    H0 = 'H0'
    H1 = 'H1'

    @classmethod
    def from_flag(cls, watermarked):
        return cls.H1 if watermarked else cls.H0

    def __bool__(self):
        return self is Decision.H1

"""Exception hierarchy

All errors derive from ValueError so code catching ValueError keeps working.
The command line maps them onto exit codes.
"""


class WatermarkError(ValueError):
    """Base class for errors raised by wmdetect"""


class NumericError(WatermarkError):
    """Numeric or domain failure: degenerate statistics or outputs"""


class InfeasibleError(NumericError):
    """No candidate satisfies the distortion constraint"""


class CapExceededError(WatermarkError):
    """Input exceeds a desk-scale enumeration cap"""

    def __init__(self, what, value, cap):
        self.what = what
        self.value = value
        self.cap = cap
        super().__init__('{}: {} exceeds the enumeration cap of {}'.format(what, value, cap))

"""Package-wide defaults. Every public operation also takes these as arguments."""

DEFAULT_PREC = 256
PREC_CAP = 4096
DEFAULT_DEPTH = 64
EQUIV_BOUND = 2 ** 16
# Frobenius verdicts compare exponents, which move far more slowly than ratios.
FROB_BOUND = 8
# A selected quotient subsequence "escapes" when its late maximum is at least
# this multiple of its early maximum.
ESCAPE_FACTOR = 2
# Quotients at or below this value count as "small" when hunting for abysses.
ABYSS_BOUND = 2
# Streams whose best denominators exceed this many bits are not expanded further
# by the window-based verdicts.
STREAM_BIT_BUDGET = 1 << 16

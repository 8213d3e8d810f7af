"""Exception types shared across the toolkit.

Every error carries its diagnostic payload as attributes so callers
(and the CLI's machine-readable error records) can report structured
failures instead of parsing messages.
"""


class BenchmarkError(Exception):
    """Base class for all toolkit errors."""


class SelfLoopError(BenchmarkError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"event {index}: source and target are the same node")


class NegativeTimestampError(BenchmarkError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"event {index}: timestamp is negative")


class EmptyGraphError(BenchmarkError):
    def __init__(self, message: str = "graph has no events and no explicit time span"):
        super().__init__(message)


class BinOutOfRangeError(BenchmarkError):
    def __init__(self, bin_index: int, num_bins: int):
        self.bin_index = bin_index
        self.num_bins = num_bins
        super().__init__(f"bin {bin_index} outside [0, {num_bins})")


class UnknownNodeError(BenchmarkError):
    def __init__(self, node: int):
        self.node = node
        super().__init__(f"node {node} is not part of the graph")


class InsufficientComponentError(BenchmarkError):
    def __init__(self, reached: int, requested: int):
        self.reached = reached
        self.requested = requested
        super().__init__(
            f"component exhausted at {reached} nodes, {requested} requested"
        )


class SamplingExhaustedError(BenchmarkError):
    def __init__(self, attempts: int, collected: int, requested: int):
        self.attempts = attempts
        self.collected = collected
        self.requested = requested
        super().__init__(
            f"gave up after {attempts} seed attempts with {collected}/{requested} instances"
        )


class InvalidConfigError(BenchmarkError):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"invalid config field '{field}': {reason}")


class OutOfDefinedRangeError(BenchmarkError):
    def __init__(self, t: int, lo: int, hi: int):
        self.t = t
        self.lo = lo
        self.hi = hi
        super().__init__(f"bin {t} outside defined range [{lo}, {hi}]")


class SequenceTooShortError(BenchmarkError):
    def __init__(self, num_bins: int, z: int):
        self.num_bins = num_bins
        self.z = z
        super().__init__(
            f"sequence of {num_bins} bins too short for window half-width z={z} "
            f"(need at least {2 * z + 4})"
        )


class SeriesTooShortError(BenchmarkError):
    def __init__(self, length: int, required: int, node: int | None = None):
        self.length = length
        self.required = required
        self.node = node
        where = f" for node {node}" if node is not None else ""
        super().__init__(f"series of length {length}{where} shorter than required {required}")


class InsufficientTrainRowsError(BenchmarkError):
    def __init__(self, rows: int, required: int):
        self.rows = rows
        self.required = required
        super().__init__(f"{rows} training rows available, {required} required")


class EmptyTestRegionError(BenchmarkError):
    def __init__(self, num_bins: int, train_fraction: float):
        self.num_bins = num_bins
        self.train_fraction = train_fraction
        super().__init__(
            f"train fraction {train_fraction} leaves no test bins out of {num_bins}"
        )


class CoverageGapError(BenchmarkError):
    def __init__(self, missing):
        self.missing = list(missing)
        head = ", ".join(str(c) for c in self.missing[:5])
        super().__init__(f"{len(self.missing)} cells without predictions (first: {head})")


class DegenerateGraphError(BenchmarkError):
    def __init__(self, message: str):
        super().__init__(message)


class PluginCrashError(BenchmarkError):
    def __init__(self, exit_code: int, stderr: str = ""):
        self.exit_code = exit_code
        self.stderr = stderr
        tail = stderr.strip().splitlines()[-1] if stderr.strip() else ""
        suffix = f" (stderr: {tail})" if tail else ""
        super().__init__(f"plugin exited with code {exit_code}{suffix}")


class ProtocolViolationError(BenchmarkError):
    def __init__(self, message: str):
        super().__init__(f"plugin protocol violation: {message}")


class PluginTimeoutError(BenchmarkError):
    def __init__(self, timeout_s: float):
        self.timeout_s = timeout_s
        super().__init__(f"plugin exceeded {timeout_s:.0f} s wall-clock budget")

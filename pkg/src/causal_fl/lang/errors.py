class MilError(Exception):
    """Base class for static errors in MIL programs."""


class MilSyntaxError(MilError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class UnresolvedVariable(MilError):
    def __init__(self, name: str, line: int):
        super().__init__(f"line {line}: unresolved variable '{name}'")
        self.name = name
        self.line = line


class ArityMismatch(MilError):
    def __init__(self, name: str, expected: int, got: int):
        super().__init__(f"{name} expects {expected} argument(s), got {got}")
        self.name = name
        self.expected = expected
        self.got = got

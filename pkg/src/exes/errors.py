"""Exception hierarchy shared across the engine."""


class ExesError(Exception):
    """Base class for all engine errors."""


class ParseError(ExesError):
    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class DuplicateNode(ExesError):
    def __init__(self, node_id):
        super().__init__(f"duplicate node id {node_id}")
        self.node_id = node_id


class SelfLoop(ExesError):
    def __init__(self, node_id):
        super().__init__(f"self loop at node {node_id}")
        self.node_id = node_id


class DanglingEdge(ExesError):
    def __init__(self, u, v):
        super().__init__(f"edge ({u}, {v}) references an unknown node")
        self.u = u
        self.v = v


class UnknownNode(ExesError):
    def __init__(self, node_id):
        super().__init__(f"unknown node {node_id}")
        self.node_id = node_id


class UnknownSkill(ExesError):
    def __init__(self, token):
        super().__init__(f"unknown skill {token!r}")
        self.token = token


class OverlayConflict(ExesError):
    pass


class InfeasibleParameters(ExesError):
    pass


class DimensionTooLarge(ExesError):
    pass


class EmptyVocabulary(ExesError):
    pass


class DirectionMismatch(ExesError):
    pass


class NoCandidates(ExesError):
    pass


class ExplanationTimeout(ExesError):
    pass


class OracleUnavailable(ExesError):
    pass


class InsufficientPopulation(ExesError):
    pass

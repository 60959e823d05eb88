"""Exception types shared across the package."""


class CoincidentPointError(ValueError):
    """Raised when a quadrant is requested for a point equal to the source."""


class CongestedLinkError(ValueError):
    """Raised when traffic intensity is requested on a link with no available bandwidth."""


class SaturatedChannelError(ValueError):
    """Raised when a channel's service capacity cannot keep up with its flow rate."""


class InfeasibleBalanceError(ValueError):
    """Raised when the envisaged bandwidth exceeds what the neighborhood can carry."""


class EmptyKnowledgeBaseError(RuntimeError):
    """Raised when node selection runs against an unpopulated knowledge base."""

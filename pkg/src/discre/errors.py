"""Exception types shared across the toolkit."""


class DiscreError(Exception):
    """Base class for all toolkit errors."""


class DataFormatError(DiscreError):
    """An input file violates its documented format."""


class CheckpointError(DiscreError):
    """A model checkpoint is unreadable, truncated or incompatible."""


class TrainingDivergedError(DiscreError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, step: int, message_id: str):
        self.epoch = epoch
        self.step = step
        self.message_id = message_id
        super().__init__(
            f"non-finite loss at epoch {epoch}, step {step} (message {message_id!r})"
        )

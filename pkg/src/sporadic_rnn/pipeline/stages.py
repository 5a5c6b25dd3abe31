"""Named pipeline stages so failures report where they happened."""

import logging
from collections.abc import Iterator
from contextlib import contextmanager

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    """An exception raised inside a named stage."""

    def __init__(self, stage: str, error: BaseException):
        self.stage = stage
        self.error = error
        message = " ".join(str(error).split()) or type(error).__name__
        super().__init__(f"stage={stage} error={type(error).__name__} message={message}")


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Attach the stage name to any exception leaving the block."""
    log.debug(f"Stage {name} started")
    try:
        yield
    except StageError:
        raise
    except Exception as e:
        raise StageError(name, e) from e

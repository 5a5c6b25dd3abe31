"""Enumerations for cell kinds and missing-value fills."""

from enum import Enum

from sporadic_rnn.engine.numerics import Activation


class CellType(str, Enum):
    """Recurrent cell kinds.

    The `car_` kinds train their CAR correction layers; the plain kinds run the
    same kernels with the correction frozen at zero. `car` is a bare CAR(1)
    regressor with no recurrent or output weights.
    """

    car_rnn = "car_rnn"
    car_lstm = "car_lstm"
    car_gru = "car_gru"
    rnn = "rnn"
    lstm = "lstm"
    gru = "gru"
    car = "car"

    @property
    def base(self) -> str:
        """Kernel family: rnn, lstm, gru or car."""
        return self.value.removeprefix("car_")

    @property
    def has_car(self) -> bool:
        """Whether the CAR correction parameters are trained."""
        return self.value.startswith("car")


class FillMode(str, Enum):
    """Baseline missing-value fills applied before the network sees the inputs."""

    mean = "mean"                      # GRU-Mean
    forward = "forward"                # GRU-Forward
    nearest_concat = "nearest_concat"  # GRU-Concat


ALL_CELL_TYPES = [c.value for c in CellType]

__all__ = ["Activation", "CellType", "FillMode", "ALL_CELL_TYPES"]

"""Turn binned sequences into one-step-ahead training examples."""

import numpy as np

from sporadic_rnn.data.binning import BinnedSequence, bin_dataset
from sporadic_rnn.data.fill import apply_baseline_fill
from sporadic_rnn.engine.batch import Example, SequenceBatch
from sporadic_rnn.engine.car import locate_sources
from sporadic_rnn.models.enums import FillMode
from sporadic_rnn.models.series import SporadicDataset


def input_rows(seq: BinnedSequence) -> BinnedSequence:
    """Rows 1..K−1 as inputs, each paired with the gap to the row it predicts."""
    return BinnedSequence(
        subject_id=seq.subject_id,
        values=seq.values[:-1],
        mask=seq.mask[:-1],
        rep_times=seq.rep_times[:-1],
        delta_t=seq.delta_t[1:],
        label=seq.label,
    )


def make_example(seq: BinnedSequence, fill: FillMode | None = None) -> Example:
    """Inputs from rows 1..K−1 and targets from rows 2..K of a binned sequence.

    Without a fill, missing inputs are flagged for the imputer, which carries
    values only from other input rows. Targets always keep the original mask.
    """
    inp = input_rows(seq)
    if fill is not None:
        filled = apply_baseline_fill(inp, fill)
        inputs, input_mask = filled.values, filled.mask
        source_values = np.zeros_like(inputs)
        gaps = np.zeros_like(inputs)
        imputable = np.zeros(inputs.shape, dtype=bool)
    else:
        inputs = np.nan_to_num(inp.values, nan=0.0)
        input_mask = inp.mask
        source_row, gaps, imputable = locate_sources(inp.mask, inp.rep_times)
        source_values = np.take_along_axis(inputs, source_row, axis=0)
    return Example(
        subject_id=seq.subject_id,
        inputs=inputs,
        input_mask=input_mask,
        source_values=source_values,
        gaps=gaps,
        imputable=imputable,
        targets=np.nan_to_num(seq.values[1:], nan=0.0),
        target_mask=seq.mask[1:],
        delta_t=inp.delta_t,
    )


def build_examples(
    data: SporadicDataset,
    tau: float,
    fill: FillMode | None = None,
) -> list[Example]:
    """Bin a (standardized) dataset at width τ and build one example per subject."""
    return [make_example(seq, fill) for seq in bin_dataset(data.series, tau, data.n_features)]


def build_batch(
    data: SporadicDataset,
    tau: float,
    fill: FillMode | None = None,
    model_tau: float | None = None,
) -> SequenceBatch:
    """All subjects of a dataset as one padded batch.

    `model_tau` is the τ of the network's CAR correction when it differs from
    the bin width (a bare CAR regressor uses 0).
    """
    examples = build_examples(data, tau, fill)
    return SequenceBatch.from_examples(examples, tau if model_tau is None else model_tau)

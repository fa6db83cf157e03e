"""Figure assembly for sweep tables.

Every number drawn comes verbatim from a CSV row, CSV metadata, or an
explicit flag; this module never derives one value from another. Data
curves are added to the axes first, overlays after, so the first
len(inputs) lines are always the success-rate curves.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from matplotlib.figure import Figure

from .csvio import SweepTable, metadata_float, metadata_float_list, read_sweep_csv

FORMATS = ("png", "svg")


@dataclass(frozen=True)
class PlotSpec:
    """Inputs, overlays, and output target of one figure."""

    inputs: tuple
    out: str | None = None
    image_format: str | None = None  # inferred from the out suffix when None
    overlay_rate: bool = False
    rate_value: float | None = None  # overrides metadata theoretical_rate
    overlay_coupon: bool = False
    overlay_coherence: bool = False
    coherence_value: float | None = None  # overrides metadata coherence

    def __post_init__(self):
        paths = tuple(str(p) for p in self.inputs)
        if not paths:
            raise ValueError("need at least one input CSV")
        object.__setattr__(self, "inputs", paths)
        if self.image_format is not None and self.image_format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}")


def resolved_format(spec: PlotSpec) -> str:
    if spec.image_format is not None:
        return spec.image_format
    if spec.out is None:
        raise ValueError("no output path to infer the image format from")
    suffix = Path(spec.out).suffix.lstrip(".").lower()
    if suffix not in FORMATS:
        raise ValueError(f"cannot infer format from {spec.out!r}; pass --format")
    return suffix


def _vertical_values(tables, explicit, key, flag_name):
    if explicit is not None:
        return (explicit,)
    values = [v for t in tables if (v := metadata_float(t, key)) is not None]
    if not values:
        raise ValueError(f"no {key} metadata in any input; pass {flag_name}")
    return tuple(dict.fromkeys(values))  # drop duplicates, keep order


def render(spec: PlotSpec) -> Figure:
    """Build the figure; save it when the spec names an output path."""
    tables = [read_sweep_csv(path) for path in spec.inputs]
    fig = Figure(figsize=(6.4, 4.8))
    ax = fig.add_subplot()

    for table in tables:
        label = table.metadata.get("model", Path(table.path).stem)
        rhos = [row.rho for row in table.rows]
        line = ax.plot(rhos, [row.success_rate for row in table.rows], marker="o", label=label)[0]
        ax.fill_between(
            rhos,
            [row.ci_low for row in table.rows],
            [row.ci_high for row in table.rows],
            color=line.get_color(),
            alpha=0.2,
            linewidth=0,
        )

    if spec.overlay_rate:
        for i, value in enumerate(
            _vertical_values(tables, spec.rate_value, "theoretical_rate", "--rate-value")
        ):
            ax.axvline(
                value, linestyle="--", color="black", alpha=0.7,
                label="theoretical rate" if i == 0 else None,
            )

    if spec.overlay_coherence:
        for i, value in enumerate(
            _vertical_values(tables, spec.coherence_value, "coherence", "--coherence-value")
        ):
            ax.axvline(
                value, linestyle="-.", color="gray", alpha=0.9,
                label="coherence" if i == 0 else None,
            )

    if spec.overlay_coupon:
        drawn = False
        for table in tables:
            rho = metadata_float_list(table, "coupon_rho")
            value = metadata_float_list(table, "coupon_value")
            if rho is None and value is None:
                continue
            if rho is None or value is None or len(rho) != len(value):
                raise ValueError(
                    f"{table.path}: coupon_rho and coupon_value must be equal-length lists"
                )
            ax.plot(
                rho, value, linestyle=":", color="black",
                label=None if drawn else "exact reference",
            )
            drawn = True
        if not drawn:
            raise ValueError("no coupon_rho/coupon_value metadata in any input")

    ax.set_xlabel("sampling rate rho")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.05, 1.05)
    if len(tables) == 1 and "model" in tables[0].metadata:
        ax.set_title(tables[0].metadata["model"])
    handles, labels = ax.get_legend_handles_labels()
    if labels:
        ax.legend(loc="lower right")

    if spec.out is not None:
        fig.savefig(spec.out, format=resolved_format(spec))
    return fig

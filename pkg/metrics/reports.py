"""
Fold reports, gains and the text/CSV/JSON renderings of them.

Tables print mIoU in percent with one decimal, fold columns first and the
mean last.
"""
import csv
import io
import logging
import math
from dataclasses import dataclass, field

from diffss.exceptions import DegenerateInput, ReportMismatch

from .scores import ClassIoU, IoUAccumulator

logger = logging.getLogger(__name__)

# Published mIoU (%) of full-scale models, kept for context next to desk-scale
# runs: (1-shot, 1-shot with four generated supports, true 5-shot).
PUBLISHED_RESULTS = {
    'BAM / pascal5i / segmap': (67.8, 69.3, 70.9),
    'HDMNet / pascal5i / scribble': (69.4, 70.2, 71.8),
    'HSNet / fss1000 / hed': (85.19, 86.20, None),
}

# config keys that must agree between a baseline and its augmented run
MATCHED_KEYS = ('dataset', 'phase', 'k_original', 'seed', 'segmenter', 'episodes')


@dataclass
class FoldReport:
    config: dict
    folds: dict[int, float]
    per_class: dict[int, list[ClassIoU]] = field(default_factory=dict)
    episodes: int = 0
    failures: int = 0

    @property
    def mean(self) -> float:
        if not self.folds:
            raise DegenerateInput('report has no folds')
        return math.fsum(self.folds.values()) / len(self.folds)

    @property
    def label(self) -> str:
        return self.config.get('label') or (
            f"{self.config.get('dataset')} k={self.config.get('k_original')} "
            f"n_aux={self.config.get('n_aux')} {self.config.get('guidance')}"
        )


def build_fold_report(config: dict, accumulators: dict[int, IoUAccumulator], episodes: int = 0,
                      failures: int = 0) -> FoldReport:
    folds, per_class = {}, {}
    for fold in sorted(accumulators):
        accumulator = accumulators[fold]
        if not accumulator:
            raise DegenerateInput(f'fold {fold} has no scored episodes')
        folds[fold] = accumulator.miou()
        per_class[fold] = accumulator.per_class()
    return FoldReport(config=dict(config), folds=folds, per_class=per_class, episodes=episodes, failures=failures)


@dataclass(frozen=True)
class GainRecord:
    base: float
    augmented: float
    delta: float
    kshot: float | None = None
    kshot_delta: float | None = None

    @property
    def text(self) -> str:
        """Gain in percentage points, '+x' or '+x/y' with y the true K-shot gain."""
        first = f'{self.delta * 100:+.1f}'
        if self.kshot_delta is None:
            return first
        return f'{first}/{self.kshot_delta * 100:.1f}'

    def to_dict(self) -> dict:
        return {
            'base': self.base,
            'augmented': self.augmented,
            'delta': self.delta,
            'kshot': self.kshot,
            'kshot_delta': self.kshot_delta,
            'text': self.text,
        }


def _check_matched(base: FoldReport, other: FoldReport, keys) -> None:
    for key in keys:
        if base.config.get(key) != other.config.get(key):
            raise ReportMismatch(
                f'{key} differs: {base.config.get(key)!r} vs {other.config.get(key)!r}'
            )
    if sorted(base.folds) != sorted(other.folds):
        raise ReportMismatch(f'folds differ: {sorted(base.folds)} vs {sorted(other.folds)}')


def gain(base: FoldReport, augmented: FoldReport, reference_kshot: FoldReport | None = None) -> GainRecord:
    _check_matched(base, augmented, MATCHED_KEYS)
    kshot = kshot_delta = None
    if reference_kshot is not None:
        _check_matched(base, reference_kshot, ('dataset', 'phase', 'seed', 'segmenter'))
        kshot = reference_kshot.mean
        kshot_delta = kshot - base.mean
    return GainRecord(
        base=base.mean,
        augmented=augmented.mean,
        delta=augmented.mean - base.mean,
        kshot=kshot,
        kshot_delta=kshot_delta,
    )


def percent(value: float | None) -> str:
    return '-' if value is None else f'{value * 100:.1f}'


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])] + [cell.rjust(w) for cell, w in zip(row[1:], widths[1:])]
        lines.append('  '.join(cells).rstrip())
    return '\n'.join(lines) + '\n'


def render_table(reports: list[FoldReport]) -> str:
    folds = sorted({f for r in reports for f in r.folds})
    rows = [['Method'] + [f'Fold-{f}' for f in folds] + ['Mean']]
    for report in reports:
        rows.append([report.label] + [percent(report.folds.get(f)) for f in folds] + [percent(report.mean)])
    return _align(rows)


def render_csv(reports: list[FoldReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['label', 'fold', 'class_index', 'intersection', 'union', 'iou', 'fold_miou', 'mean_miou'])
    for report in reports:
        for fold in sorted(report.per_class):
            for entry in report.per_class[fold]:
                writer.writerow([
                    report.label, fold, entry.class_index, entry.intersection, entry.union,
                    repr(entry.iou), repr(report.folds[fold]), repr(report.mean),
                ])
    return buffer.getvalue()


def guidance_table(rows: list[tuple[str, FoldReport, FoldReport, FoldReport | None]]) -> str:
    """One line per guidance kind: 1-shot, 1-shot with auxiliaries, true K-shot, gain."""
    table = [['Guidance', '1-shot', '+aux', 'K-shot', 'Gain']]
    for guidance, base, augmented, kshot in rows:
        record = gain(base, augmented, kshot)
        table.append([guidance, percent(record.base), percent(record.augmented), percent(record.kshot), record.text])
    return _align(table)


def published_table() -> str:
    """Published full-scale figures in the layout of the gains table, for context only."""
    table = [['Published', '1-shot', '+aux', 'K-shot']]
    for name, values in PUBLISHED_RESULTS.items():
        table.append([name] + ['-' if v is None else f'{v:g}' for v in values])
    return _align(table)


def xshot_table(reports: list[FoldReport]) -> str:
    """mIoU against the number of auxiliaries; gains are relative to n_aux = 0."""
    ordered = sorted(reports, key=lambda r: r.config.get('n_aux', 0))
    base = next((r for r in ordered if r.config.get('n_aux', 0) == 0), None)
    if base is None:
        raise ReportMismatch('x-shot sweep needs an n_aux=0 run')
    table = [['n_aux', 'mIoU', 'Gain']]
    for report in ordered:
        table.append([str(report.config.get('n_aux', 0)), percent(report.mean), gain(base, report).text])
    return _align(table)

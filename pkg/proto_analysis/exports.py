import csv
import io
from pathlib import Path

import matplotlib
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from diffss.storage import atomic_write_text

from .analysis import EmbeddingExport, Origin

MARKERS = {Origin.RAW.value: 'o', Origin.GENERATED.value: '^'}


def export_csv(export: EmbeddingExport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(['x', 'y', 'class', 'origin', 'id'])
    for (x, y), class_index, origin, sample_id in zip(
        export.points.tolist(), export.classes, export.origins, export.ids or [''] * len(export.classes)
    ):
        writer.writerow([repr(x), repr(y), class_index, origin, sample_id])
    return buffer.getvalue()


def export_svg(export: EmbeddingExport, title: str = '') -> str:
    """Scatter of the embedding, one colour per class and one marker per origin."""
    figure = Figure(figsize=(6, 6))
    FigureCanvasAgg(figure)
    ax = figure.add_subplot()
    colours = matplotlib.colormaps['tab20']
    classes = sorted(set(export.classes))
    for position, class_index in enumerate(classes):
        for origin, marker in MARKERS.items():
            picked = [i for i, (c, o) in enumerate(zip(export.classes, export.origins)) if c == class_index and o == origin]
            if not picked:
                continue
            ax.scatter(
                export.points[picked, 0], export.points[picked, 1], marker=marker,
                color=colours(position % 20), label=f'class {class_index} {origin}',
                alpha=0.9 if origin == Origin.RAW.value else 0.6,
            )
    ax.set_xlabel(f'{export.reducer} 1')
    ax.set_ylabel(f'{export.reducer} 2')
    ax.set_title(title or f'prototypes ({export.reducer}, seed {export.seed})')
    ax.legend(fontsize='small', loc='best')
    buffer = io.StringIO()
    with matplotlib.rc_context({'svg.hashsalt': 'diffss', 'svg.fonttype': 'none'}):
        figure.savefig(buffer, format='svg', metadata={'Date': None})
    return buffer.getvalue()


def write_embedding(directory: Path, export: EmbeddingExport, title: str = '') -> tuple[Path, Path]:
    directory = Path(directory)
    csv_path = atomic_write_text(directory / 'prototypes.csv', export_csv(export))
    svg_path = atomic_write_text(directory / 'prototypes.svg', export_svg(export, title))
    return csv_path, svg_path

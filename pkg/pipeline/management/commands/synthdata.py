from django.core.management.base import BaseCommand

from episodes.synthetic import make_synthetic_dataset
from pipeline.base import run_guarded


class Command(BaseCommand):
    help = 'Write the seeded two-class synthetic texture dataset used by the trend checks'

    def add_arguments(self, parser):
        parser.add_argument('--out', required=True, help='Dataset directory to create')
        parser.add_argument('--per-class', dest='per_class', type=int, default=10)
        parser.add_argument('--size', type=int, default=48)
        parser.add_argument('--seed', type=int, default=0)

    def handle(self, *args, **options):
        records = run_guarded(
            'synthdata', make_synthetic_dataset, options['out'],
            per_class=options['per_class'], size=options['size'], seed=options['seed'],
        )
        self.stdout.write(f'wrote {len(records)} images to {options["out"]}')

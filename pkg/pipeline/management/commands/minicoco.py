from pipeline.base import PipelineCommand
from pipeline.stages import run_minicoco


class Command(PipelineCommand):
    help = 'Build the stratified MiniCOCO subset and its COCO-20i fold class lists'
    stage = 'minicoco'
    require_data = False

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--train-manifest', dest='minicoco_train', help='Full COCO train manifest')
        parser.add_argument('--val-manifest', dest='minicoco_val', action='append',
                            help='Validation manifest; repeat to intersect several')
        parser.add_argument('--val-pool', dest='minicoco_pool', help='Manifest to top up thin classes from')
        parser.add_argument('--ratio', type=float, help='Sampling ratio per stratum (default 0.10)')
        parser.add_argument('--strict', action='store_true', default=None,
                            help='Fail on strata that round to zero instead of keeping one image')

    def run(self, config):
        return run_minicoco(config)

    def summary(self, config, result):
        return f'minicoco train={len(result.train)} val={len(result.val)} topped_up={len(result.topped_up)}'

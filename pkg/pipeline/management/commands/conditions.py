from pipeline.base import PipelineCommand
from pipeline.stages import run_conditions


class Command(PipelineCommand):
    help = 'Build control conditions (segmentation map, HED boundary, scribble) for every support of the split'
    stage = 'conditions'

    def run(self, config):
        return run_conditions(config)

    def summary(self, config, result):
        return f'wrote {len(result)} conditions to {config.out_dir / "conditions"}'

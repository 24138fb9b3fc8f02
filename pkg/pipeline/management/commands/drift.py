from pipeline.base import PipelineCommand
from pipeline.stages import run_drift


class Command(PipelineCommand):
    help = 'Score generated images against their source masks (generation drift)'
    stage = 'drift'

    def run(self, config):
        return run_drift(config)

    def summary(self, config, result):
        return result.render()

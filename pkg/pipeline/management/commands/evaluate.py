from pipeline.base import PipelineCommand
from pipeline.stages import run_evaluate


class Command(PipelineCommand):
    help = 'Evaluate the segmenter with and without auxiliaries and write fold reports and gain tables'
    stage = 'evaluate'

    def run(self, config):
        return run_evaluate(config)

    def summary(self, config, result):
        return (config.out_dir / 'reports' / 'table.txt').read_text(encoding='utf-8')

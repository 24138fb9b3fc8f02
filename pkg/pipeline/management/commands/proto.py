from pipeline.base import PipelineCommand
from pipeline.stages import run_proto


class Command(PipelineCommand):
    help = 'Export the raw vs generated prototype embedding and per-class consistency'
    stage = 'proto'

    def run(self, config):
        return run_proto(config)

    def summary(self, config, result):
        export, scores = result
        lines = [f'{len(export.classes)} prototypes embedded with {export.reducer}']
        lines += [f'class {c}: consistency {v:.4f}' for c, v in scores.items()]
        return '\n'.join(lines)

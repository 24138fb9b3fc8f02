from pipeline.base import PipelineCommand
from pipeline.config import check_data
from pipeline.stages import run_generate


class Command(PipelineCommand):
    help = 'Generate auxiliary support images from stored conditions; resumes an interrupted store'
    stage = 'generate'
    # only the mock backend reads the source images
    require_data = False

    def run(self, config):
        if config.backend == 'mock':
            check_data(config)
        return run_generate(config)

    def summary(self, config, result):
        return f'{len(result)} generated images in {result.root}'

class PipelineError(Exception):
    """Base class for errors raised by the PlantWatch pipeline"""
    pass

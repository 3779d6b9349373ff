from .logging import Logger

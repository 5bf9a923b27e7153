import os
import logging

LOG_LEVEL = os.environ.get('LKG_LOG_LEVEL', 'INFO')


def start_logger(module, ignore_module=None):
    '''Module logger; numpy and scipy RuntimeWarnings are routed through logging as well'''
    logging.basicConfig(format="%(asctime)s %(levelname)s: %(message)s",
                        datefmt='%A, %B %d, %Y %I:%M:%S %p %Z',
                        level=LOG_LEVEL.upper())
    logging.captureWarnings(True)
    for noisy in ('skimage', 'numexpr', 'PIL'):
        logging.getLogger(noisy).setLevel(logging.CRITICAL)
    if ignore_module:
        logging.getLogger(ignore_module).setLevel(logging.CRITICAL)
    return logging.getLogger(module)

import os


def setting(name, default, cast=str):
    """
    Read a ``KPZLAB_<NAME>`` override from the environment.

        WORKERS = setting('WORKERS', 1, int)
    """
    value = os.environ.get('KPZLAB_%s' % name)
    if value is None or value == '':
        return default
    return cast(value)


def _flag(value):
    return value.strip().lower() in ('1', 'true', 'yes', 'on')


WORKERS = max(1, setting('WORKERS', 1, int))

# TASEP window: radius = max |site| + LIGHT_CONE_SPEED * t + WINDOW_PADDING
LIGHT_CONE_SPEED = setting('LIGHT_CONE_SPEED', 4.0, float)
WINDOW_PADDING = setting('WINDOW_PADDING', 64, int)

CHECK_INVARIANTS = setting('CHECK_INVARIANTS', False, _flag)

QUAD_NODES = setting('QUAD_NODES', 80, int)
QUAD_SPAN = setting('QUAD_SPAN', 16.0, float)

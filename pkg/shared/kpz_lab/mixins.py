import concurrent.futures
import logging

from . import conf


logger = logging.getLogger(__name__)


class ReplicaPoolMixin:
    """
    Runs ``function(index)`` for every replica index, inline or across
    ``conf.WORKERS`` processes. ``function`` must be picklable (a module-level
    function or a ``functools.partial`` of one). Results come back in index
    order either way.
    """
    workers = None
    chunksize = 16

    def get_workers(self):
        return conf.WORKERS if self.workers is None else max(1, int(self.workers))

    def map_replicas(self, function, count):
        workers = self.get_workers()
        logger.debug("%d replicas on %d worker(s)", count, workers)
        if workers <= 1 or count <= 1:
            return [function(index) for index in range(count)]
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(function, range(count), chunksize=self.chunksize))

from abc import ABC, abstractmethod

from common.clustering.nmc import DEFAULT_TAU, check_tau, nmc
from common.clustering.semantic import cluster_per_semantic
from common.clustering.spatial import CENTER_SPACE, spatial_cluster
from common.clustering.votes import Clustering, VoteSet


class BaseClusterer(ABC):
    """Groups box votes into instance clusters."""

    @abstractmethod
    def cluster(self, votes: VoteSet) -> Clustering:
        pass

    def __call__(self, votes: VoteSet) -> Clustering:
        return self.cluster(votes)


class NmcClusterer(BaseClusterer):
    def __init__(self, tau: float = DEFAULT_TAU):
        check_tau(tau)
        self.tau = tau

    def cluster(self, votes: VoteSet) -> Clustering:
        return nmc(votes, self.tau)


class SpatialClusterer(BaseClusterer):
    def __init__(self, radius: float, space: str = CENTER_SPACE):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.radius = radius
        self.space = space

    def cluster(self, votes: VoteSet) -> Clustering:
        return spatial_cluster(votes, self.radius, self.space)


class PerSemanticClusterer(BaseClusterer):
    def __init__(self, inner: BaseClusterer):
        self.inner = inner

    def cluster(self, votes: VoteSet) -> Clustering:
        return cluster_per_semantic(votes, self.inner)


class ClustererFactory:
    """Factory for creating clusterers from CLI-style settings."""

    @staticmethod
    def create_clusterer(algo: str, tau: float = DEFAULT_TAU, radius: float = 0.1,
                         space: str = CENTER_SPACE, per_semantic: bool = False) -> BaseClusterer:
        algo = algo.lower()

        if algo == 'nmc':
            clusterer = NmcClusterer(tau)
        elif algo == 'sc':
            clusterer = SpatialClusterer(radius, space)
        else:
            raise ValueError(f"Unsupported clustering algorithm: {algo}")

        if per_semantic:
            return PerSemanticClusterer(clusterer)
        return clusterer

"""Box votes: one predicted box, score and semantic class per voting unit."""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from common.geometry.aabb import Aabb
from common.utils.errors import DataError, ParseError, SchemaError


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class VoteSet:
    """Box votes with their expansion back to original point indices.

    ``vote_ids`` carries the identity of each vote through filtering and
    subsetting; score ties are broken on it.
    """

    centers: np.ndarray
    sizes: np.ndarray
    scores: np.ndarray
    semantics: np.ndarray
    expansion: tuple
    vote_ids: Optional[np.ndarray] = None

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=np.float64).reshape(-1, 3)
        sizes = np.asarray(self.sizes, dtype=np.float64).reshape(-1, 3)
        scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        semantics = np.asarray(self.semantics, dtype=np.int64).reshape(-1)
        expansion = tuple(np.asarray(e, dtype=np.int64).reshape(-1) for e in self.expansion)
        m = centers.shape[0]
        for name, arr in (('sizes', sizes), ('scores', scores), ('semantics', semantics)):
            if arr.shape[0] != m:
                raise SchemaError(f"{name} has {arr.shape[0]} entries, expected {m}")
        if len(expansion) != m:
            raise SchemaError(f"expansion has {len(expansion)} entries, expected {m}")
        if not np.all(np.isfinite(scores)):
            raise SchemaError("vote scores must be finite")
        if m and np.any(sizes <= 0):
            raise SchemaError("vote box sizes must be positive")
        if any(e.size == 0 for e in expansion):
            raise SchemaError("vote expansion sets must be nonempty")
        if m:
            flat = np.concatenate(expansion)
            if np.unique(flat).size != flat.size:
                raise SchemaError("vote expansion sets must be disjoint")
        vote_ids = (np.arange(m, dtype=np.int64) if self.vote_ids is None
                    else np.asarray(self.vote_ids, dtype=np.int64).reshape(-1))
        if vote_ids.shape[0] != m:
            raise SchemaError(f"vote_ids has {vote_ids.shape[0]} entries, expected {m}")

        object.__setattr__(self, 'centers', _frozen(centers))
        object.__setattr__(self, 'sizes', _frozen(sizes))
        object.__setattr__(self, 'scores', _frozen(scores))
        object.__setattr__(self, 'semantics', _frozen(semantics))
        object.__setattr__(self, 'expansion', tuple(_frozen(e) for e in expansion))
        object.__setattr__(self, 'vote_ids', _frozen(vote_ids))

    @classmethod
    def per_point(cls, centers, sizes, scores, semantics, point_indices=None) -> 'VoteSet':
        """Votes cast by single points (singleton expansions)."""
        scores = np.asarray(scores, dtype=np.float64).reshape(-1)
        if point_indices is None:
            point_indices = np.arange(scores.shape[0])
        expansion = tuple(np.array([i], dtype=np.int64) for i in point_indices)
        return cls(centers, sizes, scores, semantics, expansion)

    @classmethod
    def empty(cls) -> 'VoteSet':
        return cls(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0), np.zeros(0, dtype=np.int64), ())

    def __len__(self) -> int:
        return self.scores.shape[0]

    @property
    def los(self) -> np.ndarray:
        return self.centers - self.sizes / 2.0

    @property
    def his(self) -> np.ndarray:
        return self.centers + self.sizes / 2.0

    @property
    def expansion_sizes(self) -> np.ndarray:
        return np.array([e.size for e in self.expansion], dtype=np.int64)

    def box(self, i: int) -> Aabb:
        return Aabb(self.centers[i], self.sizes[i], max(int(self.semantics[i]), 0))

    def point_indices(self) -> np.ndarray:
        """All original point indices covered by the votes, sorted."""
        if not self.expansion:
            return np.zeros(0, dtype=np.int64)
        return np.sort(np.concatenate(self.expansion))

    def subset(self, indices: Sequence[int]) -> 'VoteSet':
        """Votes at the given positions, in the given order, ids preserved."""
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        return VoteSet(
            centers=self.centers[idx],
            sizes=self.sizes[idx],
            scores=self.scores[idx],
            semantics=self.semantics[idx],
            expansion=tuple(self.expansion[i] for i in idx),
            vote_ids=self.vote_ids[idx],
        )

    def positions_of_ids(self, ids: Sequence[int]) -> np.ndarray:
        """Map vote ids back to positions in this set."""
        lookup = {int(v): i for i, v in enumerate(self.vote_ids)}
        try:
            return np.array([lookup[int(v)] for v in ids], dtype=np.int64)
        except KeyError as e:
            raise SchemaError(f"unknown vote id {e.args[0]}")

    def to_dict(self) -> dict:
        return {
            'vote_ids': self.vote_ids.tolist(),
            'center': self.centers.tolist(),
            'size': self.sizes.tolist(),
            'score': self.scores.tolist(),
            'semantic': self.semantics.tolist(),
            'expansion': [e.tolist() for e in self.expansion],
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'VoteSet':
        for key in ('center', 'size', 'score', 'semantic', 'expansion'):
            if key not in data:
                raise ParseError("missing vote field", field=key)
        try:
            m = len(data['score'])
        except TypeError:
            raise ParseError("expected a list of scores", field='score')
        try:
            centers = np.asarray(data['center'], dtype=np.float64).reshape(m, 3)
            sizes = np.asarray(data['size'], dtype=np.float64).reshape(m, 3)
        except (TypeError, ValueError):
            raise ParseError(f"expected {m} rows of 3 numbers", field='center/size')
        try:
            scores = np.asarray(data['score'], dtype=np.float64)
        except (TypeError, ValueError) as e:
            raise ParseError(f"scores must be numbers: {e}", field='score')
        try:
            semantics = np.asarray(data['semantic'], dtype=np.int64)
        except (TypeError, ValueError) as e:
            raise ParseError(f"semantic classes must be integers: {e}", field='semantic')
        if not isinstance(data['expansion'], list):
            raise ParseError("expected a list of point index lists", field='expansion')
        expansion = []
        for i, entry in enumerate(data['expansion']):
            try:
                expansion.append(np.asarray(entry, dtype=np.int64))
            except (TypeError, ValueError) as e:
                raise ParseError(f"point indices must be integers: {e}", field='expansion', index=i)
        vote_ids = data.get('vote_ids')
        if vote_ids is not None:
            try:
                vote_ids = np.asarray(vote_ids, dtype=np.int64)
            except (TypeError, ValueError) as e:
                raise ParseError(f"vote ids must be integers: {e}", field='vote_ids')
        return cls(
            centers=centers,
            sizes=sizes,
            scores=scores,
            semantics=semantics,
            expansion=tuple(expansion),
            vote_ids=vote_ids,
        )


@dataclass(frozen=True)
class Cluster:
    representative: int
    members: np.ndarray


@dataclass(frozen=True)
class Clustering:
    """Clusters over vote positions; member arrays include the representative."""

    clusters: List[Cluster] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.clusters)

    def __iter__(self):
        return iter(self.clusters)

    def is_partition(self, num_votes: int) -> bool:
        if not self.clusters:
            return num_votes == 0
        flat = np.concatenate([c.members for c in self.clusters])
        if flat.size != num_votes or np.unique(flat).size != num_votes:
            return False
        if flat.min() < 0 or flat.max() >= num_votes:
            return False
        return all(c.representative in set(c.members.tolist()) for c in self.clusters)

    def normalized(self, votes: VoteSet) -> List[tuple]:
        """Clusters expressed in vote ids, comparable across input orderings."""
        out = []
        for c in self.clusters:
            members = tuple(sorted(int(votes.vote_ids[m]) for m in c.members))
            out.append((int(votes.vote_ids[c.representative]), members))
        return sorted(out)

    def to_dict(self, votes: VoteSet) -> dict:
        return {'clusters': [
            {'representative': int(votes.vote_ids[c.representative]),
             'members': [int(votes.vote_ids[m]) for m in c.members]}
            for c in self.clusters
        ]}

    @classmethod
    def from_dict(cls, data: dict, votes: VoteSet) -> 'Clustering':
        if not isinstance(data, dict) or 'clusters' not in data:
            raise ParseError("missing clusters list", field='clusters')
        if not isinstance(data['clusters'], list):
            raise ParseError("expected a list of clusters", field='clusters')
        clusters = []
        for i, entry in enumerate(data['clusters']):
            if not isinstance(entry, dict):
                raise ParseError("expected a cluster object", field='clusters', index=i)
            if 'members' in entry and not isinstance(entry['members'], list):
                raise ParseError("expected a list of vote ids", field='members', index=i)
            try:
                rep = votes.positions_of_ids([entry['representative']])[0]
                members = votes.positions_of_ids(entry['members'])
            except KeyError as e:
                raise ParseError("missing cluster field", field=e.args[0], index=i)
            except DataError:
                raise
            except (TypeError, ValueError) as e:
                raise ParseError(f"vote ids must be integers: {e}", field='members', index=i)
            clusters.append(Cluster(int(rep), members))
        return cls(clusters)

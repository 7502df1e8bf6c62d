from typing import Optional, Tuple

from common.clustering.votes import Clustering, VoteSet
from common.scene.io import read_json, write_json
from common.utils.errors import ParseError


def save_votes(path: str, votes: VoteSet, background_class: Optional[int] = None) -> None:
    payload = votes.to_dict()
    if background_class is not None:
        payload['background_class'] = int(background_class)
    write_json(path, payload)


def load_votes(path: str) -> Tuple[VoteSet, Optional[int]]:
    """Votes and, when the file declares it, the background class to filter."""
    data = read_json(path)
    if not isinstance(data, dict):
        raise ParseError("expected a vote object", field='score')
    background_class = data.get('background_class')
    if background_class is not None and (not isinstance(background_class, int) or isinstance(background_class, bool)):
        raise ParseError("expected an integer class id", field='background_class')
    return VoteSet.from_dict(data), background_class


def save_clustering(path: str, clustering: Clustering, votes: VoteSet, tau: Optional[float] = None) -> None:
    payload = clustering.to_dict(votes)
    if tau is not None:
        payload['tau'] = tau
    write_json(path, payload)


def load_clustering(path: str, votes: VoteSet) -> Clustering:
    return Clustering.from_dict(read_json(path), votes)

# -*- coding: utf-8 -*-
# Part of fluxfem.
# Distributed under the terms of the GNU General Public License (GPL).
import numpy as np

_SHIFT = np.int64(32)
_LOW_MASK = np.int64((1 << 32) - 1)


class EdgeNotFoundError(KeyError):
    pass


def edge_keys(first, second):
    """Encode undirected edges (vertex index pairs) as sortable int64 keys."""
    first = np.asarray(first, dtype=np.int64)
    second = np.asarray(second, dtype=np.int64)
    low = np.minimum(first, second)
    high = np.maximum(first, second)
    return (low << _SHIFT) | high


def decode_keys(keys):
    """Inverse of :func:`edge_keys`; returns ``(low, high)`` vertex arrays."""
    keys = np.asarray(keys, dtype=np.int64)
    return keys >> _SHIFT, keys & _LOW_MASK


class EdgeTable:
    """Stores data with associated undirected edges, both sorted by the edge key."""

    def __init__(self, first=(), second=(), data=()):
        keys = edge_keys(first, second)
        data = np.asarray(data)
        if keys.shape != data.shape[: keys.ndim]:
            raise ValueError("Each edge requires a corresponding entry in `data`")
        if not keys.size:
            self._keys = np.array([], dtype=np.int64)
            self._data = data.reshape((0,) + data.shape[1:])
            return

        # Find correct order once and reorder keys and data together
        order = np.argsort(keys, kind="stable")
        self._keys = keys[order]
        self._data = data[order]
        if np.any(self._keys[1:] == self._keys[:-1]):
            raise ValueError("Duplicate edges in EdgeTable")

    @property
    def keys(self):
        return self._keys

    def _positions(self, first, second):
        keys = edge_keys(first, second)
        pos = np.searchsorted(self._keys, keys)
        pos_clipped = np.minimum(pos, max(len(self._keys) - 1, 0))
        if len(self._keys):
            found = self._keys[pos_clipped] == keys
        else:
            found = np.zeros(keys.shape, dtype=bool)
        return pos_clipped, found

    def lookup(self, first, second, default=-1):
        """Vectorised lookup; missing edges yield ``default``."""
        pos, found = self._positions(first, second)
        out = np.full(pos.shape + self._data.shape[1:], default, dtype=self._data.dtype)
        if len(self._keys):
            out[found] = self._data[pos[found]]
        return out

    def find(self, first, second):
        """
        :param first, second: edge endpoints (scalars or arrays).
        :return: data stored for every requested edge
        :raises: EdgeNotFoundError if any edge is not in the table
        """
        pos, found = self._positions(first, second)
        if not np.all(found):
            raise EdgeNotFoundError(
                f"{int(np.size(found) - np.count_nonzero(found))} edge(s) not found"
            )
        return self._data[pos]

    def __contains__(self, edge):
        _, found = self._positions(edge[0], edge[1])
        return bool(np.all(found))

    def __getitem__(self, index):
        low, high = decode_keys(self._keys[index])
        return (low, high), self._data[index]

    def __len__(self):
        assert len(self._keys) == len(self._data)
        return len(self._keys)

    def __iter__(self):
        low, high = decode_keys(self._keys)
        return iter(zip(zip(low, high), self._data))

    def __bool__(self):
        return bool(len(self._keys))

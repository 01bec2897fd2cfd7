from typing import NamedTuple, Optional

import numpy as np

from bingocache.config import raise_error
from bingocache.custom_operators import heap as kernels


class HeapInsert(NamedTuple):
    accepted: bool
    current_min: Optional[int] = None


class HeapEntry(NamedTuple):
    file: int
    key: int
    stamp: int


class ScoredHeapCache:
    """Fixed-capacity indexed min-heap of files keyed by integer scores.

    Entries are ordered by ``(key, stamp)`` where the stamp is a logical
    clock refreshed on every insertion and key update, so among equal keys
    the least recently touched entry comes out first. Each file owns a slot;
    ``positions[slot]`` tracks where the entry sits in the heap arrays, which
    gives O(log S) key updates and removals.
    """

    def __init__(self, capacity):
        if capacity < 1:
            raise_error(ValueError, f"Heap capacity must be positive, got {capacity}.")
        self.capacity = int(capacity)
        self.keys = np.zeros(capacity, dtype=np.int64)
        self.stamps = np.zeros(capacity, dtype=np.int64)
        self.slots = np.arange(capacity, dtype=np.int64)
        self.positions = np.arange(capacity, dtype=np.int64)
        self._files = [None] * capacity
        self._slot_of = {}
        self._free = list(range(capacity - 1, -1, -1))
        self._clock = 0
        self.size = 0

    def _tick(self):
        self._clock += 1
        return self._clock

    def __len__(self):
        return self.size

    def __contains__(self, file):
        return file in self._slot_of

    @property
    def full(self):
        return self.size >= self.capacity

    def files(self):
        return list(self._slot_of)

    def key_of(self, file):
        return int(self.keys[self._position(file)])

    def _position(self, file):
        slot = self._slot_of.get(file)
        if slot is None:
            raise_error(KeyError, f"File {file} is not resident.")
        return int(self.positions[slot])

    def peek_min(self):
        if not self.size:
            raise_error(IndexError, "Peek into an empty heap.")
        return HeapEntry(self._files[self.slots[0]], int(self.keys[0]), int(self.stamps[0]))

    def insert(self, file, key):
        """Insert ``file`` if there is room, otherwise report the minimum key."""
        if file in self._slot_of:
            raise_error(ValueError, f"File {file} is already resident.")
        if self.full:
            return HeapInsert(False, int(self.keys[0]))
        slot = self._free.pop()
        index = self.size
        self.keys[index] = key
        self.stamps[index] = self._tick()
        self.slots[index] = slot
        self.positions[slot] = index
        self._files[slot] = file
        self._slot_of[file] = slot
        self.size += 1
        kernels.sift_up(self.keys, self.stamps, self.slots, self.positions, index)
        return HeapInsert(True)

    def replace_min(self, file, key):
        """Evict the minimum entry in favour of ``file``; ``key`` must beat the minimum."""
        if file in self._slot_of:
            raise_error(ValueError, f"File {file} is already resident.")
        if not self.full:
            raise_error(RuntimeError, "Replace-min is only allowed on a full cache.")
        if key <= self.keys[0]:
            raise_error(
                ValueError,
                f"Key {key} does not improve on the current minimum {self.keys[0]}.",
            )
        slot = int(self.slots[0])
        evicted = self._files[slot]
        del self._slot_of[evicted]
        self._files[slot] = file
        self._slot_of[file] = slot
        self.keys[0] = key
        self.stamps[0] = self._tick()
        kernels.sift_down(self.keys, self.stamps, self.slots, self.positions, 0, self.size)
        return evicted

    def update_key(self, file, key):
        index = self._position(file)
        self.keys[index] = key
        self.stamps[index] = self._tick()
        index = kernels.sift_up(self.keys, self.stamps, self.slots, self.positions, index)
        kernels.sift_down(self.keys, self.stamps, self.slots, self.positions, index, self.size)

    def _remove_at(self, index):
        last = self.size - 1
        if index != last:
            kernels.swap_entries(self.keys, self.stamps, self.slots, self.positions, index, last)
        slot = int(self.slots[last])
        file = self._files[slot]
        key = int(self.keys[last])
        self._files[slot] = None
        del self._slot_of[file]
        self._free.append(slot)
        self.size = last
        if index < self.size:
            index = kernels.sift_up(self.keys, self.stamps, self.slots, self.positions, index)
            kernels.sift_down(self.keys, self.stamps, self.slots, self.positions, index, self.size)
        return file, key

    def pop_min(self):
        if not self.size:
            raise_error(IndexError, "Pop from an empty heap.")
        return self._remove_at(0)

    def remove(self, file):
        return self._remove_at(self._position(file))

    def entries(self):
        """Resident entries in heap order."""
        return [
            HeapEntry(self._files[self.slots[i]], int(self.keys[i]), int(self.stamps[i]))
            for i in range(self.size)
        ]

    def is_valid(self):
        """Heap property plus agreement between the slot index and the heap arrays."""
        if not kernels.is_heap(self.keys, self.stamps, self.size):
            return False
        if len(self._slot_of) != self.size:
            return False
        for file, slot in self._slot_of.items():
            index = self.positions[slot]
            if index >= self.size or self.slots[index] != slot or self._files[slot] != file:
                return False
        return True

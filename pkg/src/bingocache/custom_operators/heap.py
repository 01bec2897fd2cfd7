"""Sift kernels for the indexed binary min-heap.

Entries live at heap positions ``0..size-1`` in the parallel arrays ``keys``,
``stamps`` and ``slots``. ``positions[slot]`` gives the heap position of the
entry owning ``slot``. Entries are ordered by ``(key, stamp)``.
"""
from numba import njit


@njit("boolean(int64[:], int64[:], int64, int64)", cache=True)
def precedes(keys, stamps, i, j):
    if keys[i] != keys[j]:
        return keys[i] < keys[j]
    return stamps[i] < stamps[j]


@njit("void(int64[:], int64[:], int64[:], int64[:], int64, int64)", cache=True)
def swap_entries(keys, stamps, slots, positions, i, j):
    keys[i], keys[j] = keys[j], keys[i]
    stamps[i], stamps[j] = stamps[j], stamps[i]
    slots[i], slots[j] = slots[j], slots[i]
    positions[slots[i]] = i
    positions[slots[j]] = j


@njit("int64(int64[:], int64[:], int64[:], int64[:], int64)", cache=True)
def sift_up(keys, stamps, slots, positions, index):
    while index > 0:
        parent = (index - 1) >> 1
        if not precedes(keys, stamps, index, parent):
            break
        swap_entries(keys, stamps, slots, positions, index, parent)
        index = parent
    return index


@njit("int64(int64[:], int64[:], int64[:], int64[:], int64, int64)", cache=True)
def sift_down(keys, stamps, slots, positions, index, size):
    while True:
        smallest = index
        left = 2 * index + 1
        right = left + 1
        if left < size and precedes(keys, stamps, left, smallest):
            smallest = left
        if right < size and precedes(keys, stamps, right, smallest):
            smallest = right
        if smallest == index:
            return index
        swap_entries(keys, stamps, slots, positions, index, smallest)
        index = smallest


@njit("boolean(int64[:], int64[:], int64)", cache=True)
def is_heap(keys, stamps, size):
    for index in range(1, size):
        if precedes(keys, stamps, index, (index - 1) >> 1):
            return False
    return True

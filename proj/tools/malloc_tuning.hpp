#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

// The training loop frees and reallocates the same multi-hundred-kilobyte jet buffers
// every iteration. With glibc's defaults the heap top is trimmed and refaulted each
// time, which costs about as much system time as the arithmetic on 2D problems.
inline void tune_allocator() {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

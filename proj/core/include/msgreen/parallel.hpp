#pragma once

// Deterministic data parallelism. Work is split into fixed-size chunks whose
// boundaries depend only on the problem size, never on the worker count;
// callers accumulate per-chunk results in chunk order afterwards. That makes
// every reduction in the library bit-identical for any number of workers.

#include <functional>

namespace msgreen {

// Number of workers used when none is specified explicitly (hardware
// concurrency, at least 1).
int default_workers();

// Process-wide worker count for library internals; 0 resets to the default.
void set_workers(int n);
int workers();

// Runs fn(chunk_index, begin, end) for every chunk of `chunk` consecutive
// indices covering [0,n). Chunks are claimed dynamically by `nworkers`
// threads (pass 0 to use the process-wide setting); with one worker the
// loop runs inline on the calling thread. fn must not touch shared mutable
// state except through its own chunk slot. Exceptions from fn are rethrown
// on the calling thread (first one wins).
void parallel_chunks(long n, long chunk,
                     const std::function<void(long, long, long)>& fn,
                     int nworkers = 0);

}  // namespace msgreen

#include "gmind/parallel.hpp"
#include "gmind/error.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace gmind {

namespace {
std::atomic<int> g_threads{0};
}

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::missing_file: return "missing_file";
    case ErrorCode::unsupported_format: return "unsupported_format";
    case ErrorCode::color_image: return "color_image";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::out_of_bounds: return "out_of_bounds";
    case ErrorCode::invalid_argument: return "invalid_argument";
    }
    return "unknown";
}

void set_num_threads(int n) {
    if (n < 0) {
        throw Error(ErrorCode::invalid_argument, "thread count must be >= 0");
    }
    g_threads = n;
}

int num_threads() {
    const int n = g_threads.load();
    if (n > 0) {
        return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_rows(int rows, const std::function<void(int, int)> &fn) {
    if (rows <= 0) {
        return;
    }
    const int workers = std::min(num_threads(), rows);
    if (workers <= 1 || rows < 16) {
        fn(0, rows);
        return;
    }
    const int block = (rows + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int start = 0; start < rows; start += block) {
        pool.emplace_back(fn, start, std::min(rows, start + block));
    }
    for (auto &t : pool) {
        t.join();
    }
}

} // namespace gmind

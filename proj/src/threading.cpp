#include "hfnerf/threading.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>
#include <vector>

namespace hfnerf::kern {

namespace {

int g_threads = 1;

// Persistent pool. Workers park on a condition variable between jobs; a
// generation counter wakes them. Each worker always runs the same slot, so
// work assignment is a pure function of (range, thread count).
class Pool {
public:
    explicit Pool(int workers) : slot_fn_(nullptr), generation_(0), pending_(0) {
        for (int i = 1; i <= workers; ++i) {
            workers_.emplace_back([this, i] { worker_loop(i); });
        }
    }

    ~Pool() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            stop_ = true;
            ++generation_;
        }
        cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    int width() const { return static_cast<int>(workers_.size()) + 1; }

    void run(const std::function<void(int)>& slot_fn) {
        {
            std::lock_guard<std::mutex> lk(mu_);
            slot_fn_ = &slot_fn;
            pending_ = static_cast<int>(workers_.size());
            ++generation_;
        }
        cv_.notify_all();
        slot_fn(0);
        std::unique_lock<std::mutex> lk(mu_);
        done_cv_.wait(lk, [this] { return pending_ == 0; });
        slot_fn_ = nullptr;
    }

private:
    void worker_loop(int slot) {
        std::uint64_t seen = 0;
        for (;;) {
            const std::function<void(int)>* fn = nullptr;
            {
                std::unique_lock<std::mutex> lk(mu_);
                cv_.wait(lk, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                fn = slot_fn_;
            }
            if (fn) (*fn)(slot);
            {
                std::lock_guard<std::mutex> lk(mu_);
                if (--pending_ == 0) done_cv_.notify_one();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::condition_variable done_cv_;
    const std::function<void(int)>* slot_fn_;
    std::uint64_t generation_;
    int pending_;
    bool stop_ = false;
};

Pool* g_pool = nullptr;

}  // namespace

void set_threads(int n) {
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (n == g_threads) return;
    delete g_pool;
    g_pool = nullptr;
    g_threads = n;
}

int threads() { return g_threads; }

void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t, std::int64_t)>& body) {
    const std::int64_t total = end - begin;
    if (total <= 0) return;
    // Small ranges are not worth a wakeup round-trip.
    if (g_threads == 1 || total < 2) {
        body(begin, end);
        return;
    }
    if (!g_pool) g_pool = new Pool(g_threads - 1);
    const int nchunks = static_cast<int>(std::min<std::int64_t>(g_pool->width(), total));
    g_pool->run([&](int slot) {
        if (slot >= nchunks) return;
        const std::int64_t lo = begin + total * slot / nchunks;
        const std::int64_t hi = begin + total * (slot + 1) / nchunks;
        if (lo < hi) body(lo, hi);
    });
}

}  // namespace hfnerf::kern

#pragma once

#include <coroutine>
#include <cstdint>
#include <exception>
#include <utility>

#include "mmab/rng.hpp"

// Player-side coroutine machinery.
//
// A protocol routine is written as straight-line code that does
// `reward = co_await io.pull(arm)` wherever it selects an arm. The awaiter
// suspends the whole call stack and parks the innermost handle in the
// PlayerIo mailbox; the lockstep driver reads the pending arm from every
// player, steps the environment once, delivers the rewards, and resumes.
// Routines compose with `co_await subroutine(...)`, which chains the four
// protocol stages without flattening them into a manual state machine.
//
// A PlayerIo carries no reference to the environment or to other players:
// a routine can only read its own last reward and its own random stream.
//
// Keep every co_await in statement position (`x = co_await f(...)` or a bare
// `co_await f(...)`): gcc 11 miscompiles awaits nested inside larger
// expressions (conditional operators, call arguments), corrupting the frame.

namespace mmab {

class PlayerIo {
public:
    struct PullAwaiter {
        PlayerIo& io;
        int arm;
        bool await_ready() const noexcept { return false; }
        void await_suspend(std::coroutine_handle<> h) noexcept {
            io.pending_arm_ = arm;
            io.waiting_ = h;
        }
        double await_resume() const noexcept { return io.last_reward_; }
    };

    // Select `arm` for the current slot and suspend until its reward arrives.
    PullAwaiter pull(int arm) noexcept { return PullAwaiter{*this, arm}; }

    Rng& rng() { return rng_; }
    void seed(std::uint64_t s) { rng_.seed(s); }

    // Arm selected for the slot being resolved (valid once started).
    int pending_arm() const noexcept { return pending_arm_; }
    // Number of completed pulls, i.e. slots this player has participated in.
    long pulls_completed() const noexcept { return pulls_; }
    // True while a routine is suspended on pull(); false once it returned.
    bool awaiting() const noexcept { return static_cast<bool>(waiting_); }

    // Hand the slot's reward to the routine and run it to its next pull (or
    // to completion). No-op if nothing is suspended.
    void deliver(double reward) {
        if (!waiting_) return;
        last_reward_ = reward;
        pulls_ += 1;
        auto h = std::exchange(waiting_, nullptr);
        h.resume();
    }

private:
    int pending_arm_ = 1;
    double last_reward_ = 0.0;
    long pulls_ = 0;
    std::coroutine_handle<> waiting_{};
    Rng rng_{0};
};

namespace coro_detail {

template <typename Promise>
struct FinalAwaiter {
    bool await_ready() const noexcept { return false; }
    std::coroutine_handle<> await_suspend(std::coroutine_handle<Promise> h) const noexcept {
        auto cont = h.promise().continuation;
        return cont ? cont : std::noop_coroutine();
    }
    void await_resume() const noexcept {}
};

} // namespace coro_detail

// Lazily-started coroutine returning T. Awaiting a Task runs it inline on
// the awaiter's resumption chain; the task resumes its parent when done.
template <typename T>
class [[nodiscard]] Task {
public:
    struct promise_type {
        std::coroutine_handle<> continuation{};
        T value{};
        std::exception_ptr error{};

        Task get_return_object() {
            return Task{std::coroutine_handle<promise_type>::from_promise(*this)};
        }
        std::suspend_always initial_suspend() noexcept { return {}; }
        coro_detail::FinalAwaiter<promise_type> final_suspend() noexcept { return {}; }
        void return_value(T v) { value = std::move(v); }
        void unhandled_exception() { error = std::current_exception(); }
    };

    Task() = default;
    explicit Task(std::coroutine_handle<promise_type> h) : handle_(h) {}
    Task(Task&& other) noexcept : handle_(std::exchange(other.handle_, nullptr)) {}
    Task& operator=(Task&& other) noexcept {
        if (this != &other) {
            destroy();
            handle_ = std::exchange(other.handle_, nullptr);
        }
        return *this;
    }
    Task(const Task&) = delete;
    Task& operator=(const Task&) = delete;
    ~Task() { destroy(); }

    // Begin executing a root task; it runs until its first suspension.
    void start() { handle_.resume(); }
    bool done() const { return !handle_ || handle_.done(); }

    // Rethrow a routine's escaped exception, if any. Root-level use.
    void check() const {
        if (handle_ && handle_.done() && handle_.promise().error)
            std::rethrow_exception(handle_.promise().error);
    }

    auto operator co_await() && noexcept {
        struct Awaiter {
            std::coroutine_handle<promise_type> h;
            bool await_ready() const noexcept { return false; }
            std::coroutine_handle<> await_suspend(std::coroutine_handle<> parent) noexcept {
                h.promise().continuation = parent;
                return h;
            }
            T await_resume() {
                if (h.promise().error) std::rethrow_exception(h.promise().error);
                return std::move(h.promise().value);
            }
        };
        return Awaiter{handle_};
    }

private:
    void destroy() {
        if (handle_) {
            handle_.destroy();
            handle_ = nullptr;
        }
    }
    std::coroutine_handle<promise_type> handle_{};
};

template <>
class [[nodiscard]] Task<void> {
public:
    struct promise_type {
        std::coroutine_handle<> continuation{};
        std::exception_ptr error{};

        Task get_return_object() {
            return Task{std::coroutine_handle<promise_type>::from_promise(*this)};
        }
        std::suspend_always initial_suspend() noexcept { return {}; }
        coro_detail::FinalAwaiter<promise_type> final_suspend() noexcept { return {}; }
        void return_void() {}
        void unhandled_exception() { error = std::current_exception(); }
    };

    Task() = default;
    explicit Task(std::coroutine_handle<promise_type> h) : handle_(h) {}
    Task(Task&& other) noexcept : handle_(std::exchange(other.handle_, nullptr)) {}
    Task& operator=(Task&& other) noexcept {
        if (this != &other) {
            destroy();
            handle_ = std::exchange(other.handle_, nullptr);
        }
        return *this;
    }
    Task(const Task&) = delete;
    Task& operator=(const Task&) = delete;
    ~Task() { destroy(); }

    void start() { handle_.resume(); }
    bool done() const { return !handle_ || handle_.done(); }
    void check() const {
        if (handle_ && handle_.done() && handle_.promise().error)
            std::rethrow_exception(handle_.promise().error);
    }

    auto operator co_await() && noexcept {
        struct Awaiter {
            std::coroutine_handle<promise_type> h;
            bool await_ready() const noexcept { return false; }
            std::coroutine_handle<> await_suspend(std::coroutine_handle<> parent) noexcept {
                h.promise().continuation = parent;
                return h;
            }
            void await_resume() {
                if (h.promise().error) std::rethrow_exception(h.promise().error);
            }
        };
        return Awaiter{handle_};
    }

private:
    void destroy() {
        if (handle_) {
            handle_.destroy();
            handle_ = nullptr;
        }
    }
    std::coroutine_handle<promise_type> handle_{};
};

} // namespace mmab

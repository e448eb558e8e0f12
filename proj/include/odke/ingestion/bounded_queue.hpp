#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>

#include "odke/error.hpp"
#include "odke/ndjson.hpp"

namespace odke {

// Multi-producer, single-consumer FIFO. Without a spill file, push blocks while
// the queue is full. With one, overflow is appended to the file and read back in
// order once memory drains, so producers never block.
template <typename T>
class BoundedQueue {
 public:
  struct Spill {
    std::filesystem::path path;
    std::function<Json(const T&)> encode;
    std::function<T(const Json&)> decode;
  };

  explicit BoundedQueue(std::size_t capacity, std::optional<Spill> spill = std::nullopt)
      : capacity_(capacity == 0 ? 1 : capacity), spill_(std::move(spill)) {
    if (spill_) {
      std::ofstream(spill_->path, std::ios::trunc);
      reader_.open(spill_->path);
    }
  }

  BoundedQueue(const BoundedQueue&) = delete;
  BoundedQueue& operator=(const BoundedQueue&) = delete;

  // Returns false when the queue is closed.
  bool push(T item) {
    std::unique_lock lock(mutex_);
    if (!spill_) not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    if (spill_ && (spilled_ > 0 || items_.size() >= capacity_)) {
      std::ofstream out(spill_->path, std::ios::app);
      out << spill_->encode(item).dump() << '\n';
      if (!out) throw Error("cannot write queue spill " + spill_->path.string());
      ++spilled_;
      ++spilled_total_;
    } else {
      items_.push_back(std::move(item));
    }
    not_empty_.notify_one();
    return true;
  }

  // Blocks until an item is available; nullopt once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty() || spilled_ > 0; });
    return take_locked();
  }

  std::optional<T> try_pop() {
    std::lock_guard lock(mutex_);
    return take_locked();
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
  }
  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size() + spilled_;
  }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t spilled_total() const {
    std::lock_guard lock(mutex_);
    return spilled_total_;
  }

 private:
  std::optional<T> take_locked() {
    if (items_.empty() && spilled_ > 0) refill_locked();
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void refill_locked() {
    std::string line;
    reader_.clear();
    while (spilled_ > 0 && items_.size() < capacity_ && std::getline(reader_, line)) {
      items_.push_back(spill_->decode(Json::parse(line)));
      --spilled_;
    }
  }

  const std::size_t capacity_;
  std::optional<Spill> spill_;
  std::ifstream reader_;
  mutable std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  std::size_t spilled_ = 0;
  std::size_t spilled_total_ = 0;
  bool closed_ = false;
};

}  // namespace odke

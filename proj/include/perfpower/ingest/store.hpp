#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "perfpower/errors.hpp"
#include "perfpower/serp.hpp"

namespace perfpower::ingest {

class StoreError : public IoError {
 public:
  using IoError::IoError;
};

struct StoredEvent {
  ClickEvent event;
  std::int64_t received_at_ms = 0;
  std::uint64_t source_addr_hash = 0;  // rate limiting only; never exported

  bool operator==(const StoredEvent&) const = default;
};

enum class AppendStatus { Stored, Duplicate };

struct StoreStats {
  std::size_t count = 0;
  std::optional<std::int64_t> last_write_ms;
};

class EventStore {
 public:
  virtual ~EventStore() = default;

  // Returns once the event is durable. An eventId already stored (or being
  // stored) yields Duplicate without a second write. Throws StoreError.
  virtual AppendStatus append(StoredEvent event) = 0;

  // Events with since <= receivedAt < until, ordered by receivedAt (ties in
  // commit order).
  virtual std::vector<StoredEvent> range(std::int64_t since_ms, std::int64_t until_ms) const = 0;

  // Throws StoreError while the store is failing.
  virtual StoreStats stats() const = 0;
};

// Append-only log file with a single writer thread. Concurrent appends are
// batched; each batch is written and fdatasync'ed before any of its callers
// return (group commit).
//
// File layout: the 8-byte magic "PPEVLOG1", then records of
//   u32 LE  length of the JSON payload
//   i64 LE  receivedAt (UTC ms)
//   u64 LE  sourceAddrHash
//   payload canonical event JSON
// A torn record at the tail (crash mid-write) is truncated away on open; any
// other damage raises StoreError.
class FileEventStore final : public EventStore {
 public:
  using Clock = std::function<std::int64_t()>;

  explicit FileEventStore(std::filesystem::path path, Clock wall_clock_ms = {});
  ~FileEventStore() override;

  FileEventStore(const FileEventStore&) = delete;
  FileEventStore& operator=(const FileEventStore&) = delete;

  AppendStatus append(StoredEvent event) override;
  std::vector<StoredEvent> range(std::int64_t since_ms, std::int64_t until_ms) const override;
  StoreStats stats() const override;

  const std::filesystem::path& path() const { return path_; }

 private:
  struct Pending {
    StoredEvent event;
    std::promise<void> done;
  };

  void recover();
  void writer_loop();
  void write_batch(std::vector<Pending>& batch);

  std::filesystem::path path_;
  Clock clock_;
  int fd_ = -1;

  // Guards ids_, inflight_, queue_, stop_, healthy_, last_error_.
  mutable std::mutex mutex_;
  std::condition_variable wake_;
  std::unordered_set<std::string> ids_;
  std::unordered_map<std::string, std::shared_future<void>> inflight_;
  std::deque<Pending> queue_;
  bool stop_ = false;
  bool healthy_ = true;
  std::string last_error_;

  mutable std::shared_mutex committed_mutex_;
  std::vector<StoredEvent> committed_;
  std::optional<std::int64_t> last_write_ms_;

  std::thread writer_;
};

}  // namespace perfpower::ingest

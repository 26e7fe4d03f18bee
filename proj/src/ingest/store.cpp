#include "perfpower/ingest/store.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>

#include <fmt/format.h>

#include "perfpower/event_io.hpp"

namespace perfpower::ingest {

namespace {

constexpr std::string_view kMagic = "PPEVLOG1";
constexpr std::size_t kRecordHeader = 4 + 8 + 8;
constexpr std::uint32_t kMaxPayload = 1u << 20;

std::int64_t system_now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string errno_message(std::string_view what) {
  return fmt::format("{}: {}", what, std::strerror(errno));
}

template <typename T>
void put_le(std::string& out, T value) {
  auto u = static_cast<std::make_unsigned_t<T>>(value);
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
  }
}

template <typename T>
T get_le(const char* p) {
  std::make_unsigned_t<T> u = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(p[b])) << (8 * b);
  }
  return static_cast<T>(u);
}

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StoreError(errno_message("write"));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

std::string read_file(int fd) {
  std::string contents;
  std::array<char, 1 << 16> buf{};
  off_t offset = 0;
  while (true) {
    const ssize_t n = ::pread(fd, buf.data(), buf.size(), offset);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw StoreError(errno_message("read"));
    }
    if (n == 0) break;
    contents.append(buf.data(), static_cast<std::size_t>(n));
    offset += n;
  }
  return contents;
}

void sync_directory(const std::filesystem::path& file) {
  auto dir = file.parent_path();
  if (dir.empty()) dir = ".";
  const int dfd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (dfd < 0) return;
  ::fsync(dfd);
  ::close(dfd);
}

}  // namespace

FileEventStore::FileEventStore(std::filesystem::path path, Clock wall_clock_ms)
    : path_(std::move(path)), clock_(wall_clock_ms ? std::move(wall_clock_ms) : system_now_ms) {
  fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw StoreError(errno_message(fmt::format("open '{}'", path_.string())));
  try {
    recover();
  } catch (...) {
    ::close(fd_);
    throw;
  }
  writer_ = std::thread([this] { writer_loop(); });
}

FileEventStore::~FileEventStore() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  if (writer_.joinable()) writer_.join();
  if (fd_ >= 0) ::close(fd_);
}

void FileEventStore::recover() {
  const std::string contents = read_file(fd_);
  auto truncate_to = [&](std::size_t size) {
    if (::ftruncate(fd_, static_cast<off_t>(size)) != 0) throw StoreError(errno_message("ftruncate"));
  };

  if (contents.size() < kMagic.size()) {
    // New file, or a crash while writing the header.
    if (!std::string_view(kMagic).starts_with(contents)) {
      throw StoreError(fmt::format("'{}' is not an event store", path_.string()));
    }
    truncate_to(0);
    if (::pwrite(fd_, kMagic.data(), kMagic.size(), 0) != static_cast<ssize_t>(kMagic.size()) ||
        ::fdatasync(fd_) != 0) {
      throw StoreError(errno_message("initialize store"));
    }
    sync_directory(path_);
    return;
  }
  if (std::string_view(contents).substr(0, kMagic.size()) != kMagic) {
    throw StoreError(fmt::format("'{}' is not an event store", path_.string()));
  }

  std::size_t offset = kMagic.size();
  while (offset < contents.size()) {
    const std::size_t remaining = contents.size() - offset;
    if (remaining < kRecordHeader) break;
    const char* p = contents.data() + offset;
    const auto length = get_le<std::uint32_t>(p);
    if (length > kMaxPayload) {
      throw StoreError(fmt::format("corrupt record length at offset {}", offset));
    }
    if (remaining < kRecordHeader + length) break;

    StoredEvent stored;
    stored.received_at_ms = get_le<std::int64_t>(p + 4);
    stored.source_addr_hash = get_le<std::uint64_t>(p + 12);
    auto parsed = parse_event(std::string_view(p + kRecordHeader, length));
    if (!parsed.event) throw StoreError(fmt::format("corrupt record at offset {}", offset));
    stored.event = std::move(*parsed.event);
    if (ids_.insert(stored.event.event_id).second) {
      last_write_ms_ = std::max(last_write_ms_.value_or(stored.received_at_ms), stored.received_at_ms);
      committed_.push_back(std::move(stored));
    }
    offset += kRecordHeader + length;
  }
  if (offset < contents.size()) {
    truncate_to(offset);  // torn tail
    if (::fdatasync(fd_) != 0) throw StoreError(errno_message("fdatasync"));
  }
}

AppendStatus FileEventStore::append(StoredEvent event) {
  std::shared_future<void> done;
  bool duplicate = false;
  {
    std::lock_guard lock(mutex_);
    if (stop_) throw StoreError("store is shutting down");
    const auto& id = event.event.event_id;
    if (ids_.contains(id)) {
      auto it = inflight_.find(id);
      if (it == inflight_.end()) return AppendStatus::Duplicate;
      done = it->second;
      duplicate = true;
    } else {
      Pending pending{std::move(event), {}};
      done = pending.done.get_future().share();
      ids_.insert(pending.event.event.event_id);
      inflight_.emplace(pending.event.event.event_id, done);
      queue_.push_back(std::move(pending));
    }
  }
  if (!duplicate) wake_.notify_one();
  done.get();  // rethrows the batch's StoreError
  return duplicate ? AppendStatus::Duplicate : AppendStatus::Stored;
}

void FileEventStore::writer_loop() {
  while (true) {
    std::vector<Pending> batch;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stop_ || !queue_.empty(); });
      if (queue_.empty()) return;  // stopping
      while (!queue_.empty()) {
        batch.push_back(std::move(queue_.front()));
        queue_.pop_front();
      }
    }
    write_batch(batch);
  }
}

void FileEventStore::write_batch(std::vector<Pending>& batch) {
  std::string buffer;
  for (const auto& p : batch) {
    const std::string payload = serialize(p.event.event);
    put_le<std::uint32_t>(buffer, static_cast<std::uint32_t>(payload.size()));
    put_le<std::int64_t>(buffer, p.event.received_at_ms);
    put_le<std::uint64_t>(buffer, p.event.source_addr_hash);
    buffer += payload;
  }

  const off_t start = ::lseek(fd_, 0, SEEK_END);
  try {
    if (start < 0) throw StoreError(errno_message("lseek"));
    write_all(fd_, buffer);
    if (::fdatasync(fd_) != 0) throw StoreError(errno_message("fdatasync"));
  } catch (const StoreError& ex) {
    const bool rolled_back = start >= 0 && ::ftruncate(fd_, start) == 0;
    {
      std::lock_guard lock(mutex_);
      healthy_ = false;
      last_error_ = ex.what();
      // Without the rollback a complete record may survive; reopening the
      // store reloads it and its id then dedups a client retry.
      if (!rolled_back) last_error_ += " (rollback failed)";
      for (const auto& p : batch) {
        ids_.erase(p.event.event.event_id);
        inflight_.erase(p.event.event.event_id);
      }
    }
    for (auto& p : batch) p.done.set_exception(std::make_exception_ptr(ex));
    return;
  }

  {
    std::unique_lock lock(committed_mutex_);
    for (const auto& p : batch) committed_.push_back(p.event);
    last_write_ms_ = clock_();
  }
  {
    std::lock_guard lock(mutex_);
    healthy_ = true;
    for (const auto& p : batch) inflight_.erase(p.event.event.event_id);
  }
  for (auto& p : batch) p.done.set_value();
}

std::vector<StoredEvent> FileEventStore::range(std::int64_t since_ms, std::int64_t until_ms) const {
  std::vector<StoredEvent> out;
  {
    std::shared_lock lock(committed_mutex_);
    for (const auto& e : committed_) {
      if (e.received_at_ms >= since_ms && e.received_at_ms < until_ms) out.push_back(e);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const StoredEvent& a, const StoredEvent& b) {
    return a.received_at_ms < b.received_at_ms;
  });
  return out;
}

StoreStats FileEventStore::stats() const {
  {
    std::lock_guard lock(mutex_);
    if (!healthy_) throw StoreError(last_error_);
  }
  std::shared_lock lock(committed_mutex_);
  return {committed_.size(), last_write_ms_};
}

}  // namespace perfpower::ingest

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace telextiles {

// Strict RFC 4648 base64 (with padding).
std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);  // throws ValidationError

// Service messages are "<decimal byte length>\n<json>\n".
std::string frame_message(std::string_view json);

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  static Endpoint parse(std::string_view text);  // "host:port"
  std::string to_string() const;
};

// Owning socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release() {
    const int fd = fd_;
    fd_ = -1;
    return fd;
  }
  void shutdown_both();

 private:
  int fd_ = -1;
};

// Buffered stream over a connected socket. Every blocking call honours the timeout.
class Connection {
 public:
  Connection(Socket socket, std::chrono::milliseconds timeout);

  static Connection connect(const Endpoint& endpoint, std::chrono::milliseconds timeout);

  void send_raw(std::string_view bytes);
  // Bytes up to and including '\n'; nullopt on orderly EOF before any byte.
  std::optional<std::string> read_line(std::size_t max_bytes = 1 << 16);
  std::string read_exact(std::size_t n);

  void send_message(std::string_view json) { send_raw(frame_message(json)); }
  // nullopt on orderly EOF between messages.
  std::optional<std::string> receive_message();

  Socket& socket() { return socket_; }

 private:
  bool fill();  // false on EOF
  Socket socket_;
  std::chrono::milliseconds timeout_;
  std::string buffer_;
};

class Listener {
 public:
  explicit Listener(const Endpoint& endpoint);
  std::uint16_t port() const { return port_; }
  // Waits up to `wait`; empty socket on timeout.
  Socket accept(std::chrono::milliseconds wait);

 private:
  Socket socket_;
  std::uint16_t port_ = 0;
};

}  // namespace telextiles

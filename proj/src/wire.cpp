#include "telextiles/wire.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <charconv>
#include <cstring>
#include <memory>

#include "telextiles/errors.hpp"

namespace telextiles {
namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
constexpr std::size_t kMaxMessage = 512u << 20;

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

void wait_ready(int fd, short events, std::chrono::milliseconds timeout, const char* what) {
  pollfd p{fd, events, 0};
  const int r = ::poll(&p, 1, static_cast<int>(timeout.count()));
  if (r == 0) throw TransportError(std::string(what) + ": timed out");
  if (r < 0) throw TransportError(errno_text(what));
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                            (static_cast<std::uint8_t>(bytes[i + 1]) << 8) | static_cast<std::uint8_t>(bytes[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = static_cast<std::uint8_t>(bytes[i]) << 16;
    if (rest == 2) v |= static_cast<std::uint8_t>(bytes[i + 1]) << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  static const auto table = [] {
    std::array<int, 256> t{};
    t.fill(-1);
    for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kAlphabet[i])] = i;
    return t;
  }();
  if (text.size() % 4 != 0) throw ValidationError("base64 length is not a multiple of 4");
  std::string out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const bool last = i + 4 == text.size();
    int pad = 0;
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && last && k >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = table[static_cast<unsigned char>(c)];
      if (d < 0 || pad > 0) throw ValidationError("invalid base64 at offset " + std::to_string(i + k));
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    if ((pad == 1 && (v & 0xff) != 0) || (pad == 2 && (v & 0xffff) != 0))
      throw ValidationError("non-canonical base64 padding bits");
    out += static_cast<char>((v >> 16) & 0xff);
    if (pad < 2) out += static_cast<char>((v >> 8) & 0xff);
    if (pad < 1) out += static_cast<char>(v & 0xff);
  }
  return out;
}

std::string frame_message(std::string_view json) {
  std::string out = std::to_string(json.size());
  out += '\n';
  out += json;
  out += '\n';
  return out;
}

Endpoint Endpoint::parse(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon + 1 == text.size())
    throw ValidationError("expected host:port, got \"" + std::string(text) + "\"");
  unsigned port = 0;
  const auto digits = text.substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || port > 65535)
    throw ValidationError("bad port in \"" + std::string(text) + "\"");
  Endpoint e;
  e.host = colon == 0 ? "127.0.0.1" : std::string(text.substr(0, colon));
  e.port = static_cast<std::uint16_t>(port);
  return e;
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.release();
  }
  return *this;
}

Socket::~Socket() {
  if (fd_ >= 0) ::close(fd_);
}

void Socket::shutdown_both() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Connection::Connection(Socket socket, std::chrono::milliseconds timeout)
    : socket_(std::move(socket)), timeout_(timeout) {}

Connection Connection::connect(const Endpoint& endpoint, std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string port = std::to_string(endpoint.port);
  if (::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &found) != 0 || !found)
    throw TransportError("cannot resolve " + endpoint.to_string());
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, &::freeaddrinfo);

  Socket s(::socket(found->ai_family, found->ai_socktype, found->ai_protocol));
  if (!s.valid()) throw TransportError(errno_text("socket"));
  const int flags = ::fcntl(s.fd(), F_GETFL, 0);
  ::fcntl(s.fd(), F_SETFL, flags | O_NONBLOCK);
  if (::connect(s.fd(), found->ai_addr, found->ai_addrlen) != 0) {
    if (errno != EINPROGRESS) throw TransportError("connect to " + endpoint.to_string() + ": " + std::strerror(errno));
    wait_ready(s.fd(), POLLOUT, timeout, "connect");
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) throw TransportError("connect to " + endpoint.to_string() + ": " + std::strerror(err));
  }
  ::fcntl(s.fd(), F_SETFL, flags);
  const int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return Connection(std::move(s), timeout);
}

void Connection::send_raw(std::string_view bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    wait_ready(socket_.fd(), POLLOUT, timeout_, "send");
    const ssize_t n = ::send(socket_.fd(), bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError(errno_text("send"));
    }
    sent += static_cast<std::size_t>(n);
  }
}

bool Connection::fill() {
  char chunk[65536];
  for (;;) {
    wait_ready(socket_.fd(), POLLIN, timeout_, "receive");
    const ssize_t n = ::recv(socket_.fd(), chunk, sizeof chunk, 0);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw TransportError(errno_text("receive"));
    }
    if (n == 0) return false;
    buffer_.append(chunk, static_cast<std::size_t>(n));
    return true;
  }
}

std::optional<std::string> Connection::read_line(std::size_t max_bytes) {
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl + 1);
      buffer_.erase(0, nl + 1);
      return line;
    }
    if (buffer_.size() > max_bytes) throw TransportError("line exceeds " + std::to_string(max_bytes) + " bytes");
    if (!fill()) {
      if (buffer_.empty()) return std::nullopt;
      throw TransportError("connection closed mid-line");
    }
  }
}

std::string Connection::read_exact(std::size_t n) {
  while (buffer_.size() < n)
    if (!fill()) throw TransportError("connection closed mid-message");
  std::string out = buffer_.substr(0, n);
  buffer_.erase(0, n);
  return out;
}

std::optional<std::string> Connection::receive_message() {
  const auto header = read_line(32);
  if (!header) return std::nullopt;
  std::size_t length = 0;
  const char* begin = header->data();
  const char* end = begin + header->size() - 1;
  const auto [ptr, ec] = std::from_chars(begin, end, length);
  if (ec != std::errc() || ptr != end || begin == end) throw TransportError("bad message length header");
  if (length > kMaxMessage) throw TransportError("message too large");
  std::string body = read_exact(length + 1);
  if (body.back() != '\n') throw TransportError("message not newline-terminated");
  body.pop_back();
  return body;
}

Listener::Listener(const Endpoint& endpoint) {
  socket_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
  if (!socket_.valid()) throw TransportError(errno_text("socket"));
  const int one = 1;
  ::setsockopt(socket_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(endpoint.port);
  if (::inet_pton(AF_INET, endpoint.host.c_str(), &addr.sin_addr) != 1)
    throw TransportError("bind address must be a dotted IPv4 address: " + endpoint.host);
  if (::bind(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    throw TransportError(errno_text("bind"));
  if (::listen(socket_.fd(), 16) != 0) throw TransportError(errno_text("listen"));
  socklen_t len = sizeof addr;
  ::getsockname(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

Socket Listener::accept(std::chrono::milliseconds wait) {
  pollfd p{socket_.fd(), POLLIN, 0};
  if (::poll(&p, 1, static_cast<int>(wait.count())) <= 0) return Socket();
  return Socket(::accept(socket_.fd(), nullptr, nullptr));
}

}  // namespace telextiles

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <map>

#include <json.hpp>

#include "plotdigit/errors.hpp"
#include "plotdigit/image_io.hpp"
#include "plotdigit/ticks.hpp"

namespace plotdigit::ticks {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

}  // namespace

ExternalRecognizer::ExternalRecognizer(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
  // Writes to a dead child must surface as EPIPE, not kill the process.
  ::signal(SIGPIPE, SIG_IGN);
  start();
}

ExternalRecognizer::~ExternalRecognizer() { stop(); }

void ExternalRecognizer::start() {
  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0) throw RecognizerUnavailable(std::string("pipe: ") + std::strerror(errno));
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw RecognizerUnavailable(std::string("pipe: ") + std::strerror(errno));
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw RecognizerUnavailable(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFL, ::fcntl(to_child_, F_GETFL) | O_NONBLOCK);
  ::fcntl(from_child_, F_SETFL, ::fcntl(from_child_, F_GETFL) | O_NONBLOCK);
  ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  read_buffer_.clear();
}

void ExternalRecognizer::stop() {
  close_fd(to_child_);
  close_fd(from_child_);
  if (pid_ > 0) {
    int status = 0;
    // Give the child a moment to exit on EOF before killing it.
    for (int i = 0; i < 20; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      ::usleep(5000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
  pid_ = -1;
}

std::vector<TextBox> ExternalRecognizer::recognize(std::vector<TextBox> boxes, const RasterImage& img) {
  if (boxes.empty()) return boxes;
  if (pid_ < 0) start();

  std::string outgoing;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    boxes[i].text.clear();
    boxes[i].confidence = 0;
    const BBox& b = boxes[i].bbox;
    const BBox clipped{std::max(0, b.x0), std::max(0, b.y0), std::min(img.width(), b.x1),
                       std::min(img.height(), b.y1)};
    nlohmann::ordered_json req;
    req["id"] = i;
    req["png_base64"] = clipped.valid() ? io::base64_encode(io::encode_png(img.crop(clipped))) : "";
    outgoing += req.dump() + "\n";
  }

  std::map<std::size_t, bool> pending;
  for (std::size_t i = 0; i < boxes.size(); ++i) pending[i] = true;
  std::size_t written = 0;
  auto deadline = std::chrono::steady_clock::now() + timeout_;

  auto fail = [&](const std::string& why) {
    stop();
    throw RecognizerUnavailable("external recognizer '" + command_ + "': " + why);
  };

  while (!pending.empty()) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      // Remaining boxes stay empty; the child is restarted on the next call.
      stop();
      return boxes;
    }
    pollfd fds[2];
    int nfds = 0;
    fds[nfds++] = {from_child_, POLLIN, 0};
    if (written < outgoing.size()) fds[nfds++] = {to_child_, POLLOUT, 0};
    const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    const int rc = ::poll(fds, nfds, static_cast<int>(std::max<long long>(1, wait)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      fail(std::string("poll: ") + std::strerror(errno));
    }
    if (nfds > 1 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t n = ::write(to_child_, outgoing.data() + written, outgoing.size() - written);
      if (n < 0 && errno != EAGAIN) fail("child closed its input");
      if (n > 0) written += static_cast<std::size_t>(n);
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[4096];
      const ssize_t n = ::read(from_child_, buf, sizeof buf);
      if (n == 0) fail("child exited before answering every box");
      if (n < 0 && errno != EAGAIN) fail(std::string("read: ") + std::strerror(errno));
      if (n > 0) read_buffer_.append(buf, static_cast<std::size_t>(n));
      for (std::size_t nl; (nl = read_buffer_.find('\n')) != std::string::npos;) {
        const std::string line = read_buffer_.substr(0, nl);
        read_buffer_.erase(0, nl + 1);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json resp;
        try {
          resp = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
          fail("malformed response line");
        }
        if (!resp.is_object() || !resp.contains("id") || !resp["id"].is_number_integer() ||
            !resp.contains("text") || !resp["text"].is_string() || !resp.contains("confidence") ||
            !resp["confidence"].is_number())
          fail("response missing id/text/confidence");
        const auto id = resp["id"].get<long long>();
        if (id < 0 || static_cast<std::size_t>(id) >= boxes.size() || !pending.count(std::size_t(id)))
          fail("response for unknown or repeated id");
        pending.erase(std::size_t(id));
        auto& box = boxes[std::size_t(id)];
        box.text = resp["text"].get<std::string>();
        box.confidence = box.text.empty() ? 0.0 : std::clamp(resp["confidence"].get<double>(), 0.0, 1.0);
        deadline = std::chrono::steady_clock::now() + timeout_;
      }
    }
  }
  return boxes;
}

}  // namespace plotdigit::ticks

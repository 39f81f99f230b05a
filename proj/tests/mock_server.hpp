#pragma once

#include <atomic>
#include <functional>
#include <string>
#include <thread>

#include <httplib.h>

namespace testsupport {

/// Local HTTP server on an ephemeral port. The handler sees every POST and
/// the number of requests received so far (starting at 1).
class MockServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&, int)>;

  explicit MockServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post(R"(.*)", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = ++requests_;
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      handler_(req, res, n);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }
  int requests() const { return requests_; }
  std::string last_body() const { return last_body_; }
  std::string last_auth() const { return last_auth_; }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> requests_{0};
  std::string last_body_;
  std::string last_auth_;
};

}  // namespace testsupport

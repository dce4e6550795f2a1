#include "forcecbf/teleop/server.hpp"

#include <atomic>
#include <chrono>
#include <deque>
#include <fstream>
#include <iostream>
#include <future>
#include <mutex>
#include <set>
#include <system_error>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "forcecbf/trace_io.hpp"

namespace forcecbf::teleop {
namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

class Hub;

class WsClient : public std::enable_shared_from_this<WsClient> {
 public:
  WsClient(tcp::socket socket, Hub& hub, std::size_t buffer)
      : ws_(std::move(socket)), hub_(hub), capacity_(std::max<std::size_t>(buffer, 1)) {}

  void start(http::request<http::string_body> req);
  void send(std::shared_ptr<const std::string> msg);
  void close();

 private:
  void read();
  void write();
  void drop();

  websocket::stream<beast::tcp_stream> ws_;
  Hub& hub_;
  std::size_t capacity_;
  beast::flat_buffer buffer_;
  std::deque<std::shared_ptr<const std::string>> out_;
  std::shared_ptr<const std::string> inflight_;
  bool writing_ = false;
  bool closed_ = false;
};

struct Inbound {
  std::weak_ptr<WsClient> from;
  std::string text;
};

// State shared between the loop thread and the I/O thread.
class Hub {
 public:
  explicit Hub(std::string hello) : hello_(std::move(hello)) {}

  net::io_context ioc;
  std::atomic<std::int64_t> steps{0};
  std::atomic<std::int64_t> sim_tick{0};
  std::atomic<bool> paused{false};
  std::atomic<bool> stopping{false};

  // I/O thread only.
  std::set<std::shared_ptr<WsClient>> clients;
  std::atomic<std::size_t> client_count{0};
  std::atomic<int> closing{0};

  void add(const std::shared_ptr<WsClient>& c) {
    clients.insert(c);
    client_count = clients.size();
    c->send(std::make_shared<const std::string>(hello_));
  }
  void remove(const std::shared_ptr<WsClient>& c) {
    clients.erase(c);
    client_count = clients.size();
  }

  void push(Inbound in) {
    std::lock_guard<std::mutex> lock(mu_);
    inbox_.push_back(std::move(in));
  }
  std::deque<Inbound> drain() {
    std::lock_guard<std::mutex> lock(mu_);
    std::deque<Inbound> out;
    out.swap(inbox_);
    return out;
  }

  void broadcast(std::shared_ptr<const std::string> msg) {
    net::post(ioc, [this, msg = std::move(msg)] {
      for (const auto& c : clients) c->send(msg);
    });
  }

  void reply(const std::weak_ptr<WsClient>& to, std::string text) {
    net::post(ioc, [to, msg = std::make_shared<const std::string>(std::move(text))] {
      if (auto c = to.lock()) c->send(msg);
    });
  }

 private:
  std::string hello_;
  std::mutex mu_;
  std::deque<Inbound> inbox_;
};

void WsClient::start(http::request<http::string_body> req) {
  beast::get_lowest_layer(ws_).expires_never();
  ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
  ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
    if (ec) return;
    if (self->hub_.stopping) {
      // Shutdown already swept the client set.
      beast::error_code ignored;
      beast::get_lowest_layer(self->ws_).socket().close(ignored);
      return;
    }
    self->hub_.add(self);
    self->read();
  });
}

void WsClient::read() {
  ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
    if (ec) {
      self->drop();
      return;
    }
    self->hub_.push({self, beast::buffers_to_string(self->buffer_.data())});
    self->buffer_.consume(self->buffer_.size());
    self->read();
  });
}

void WsClient::send(std::shared_ptr<const std::string> msg) {
  if (closed_) return;
  if (out_.size() >= capacity_) out_.pop_front();
  out_.push_back(std::move(msg));
  if (!writing_) write();
}

void WsClient::write() {
  if (out_.empty() || closed_) {
    writing_ = false;
    return;
  }
  writing_ = true;
  inflight_ = std::move(out_.front());
  out_.pop_front();
  ws_.text(true);
  ws_.async_write(net::buffer(*inflight_),
                  [self = shared_from_this()](beast::error_code ec, std::size_t) {
                    if (ec) {
                      self->drop();
                      return;
                    }
                    self->inflight_.reset();
                    self->write();
                  });
}

void WsClient::drop() {
  if (closed_) return;
  closed_ = true;
  out_.clear();
  hub_.remove(shared_from_this());
}

void WsClient::close() {
  if (closed_) return;
  auto self = shared_from_this();
  drop();
  // A peer that stopped reading would hold the close behind its pending
  // write forever; the socket deadline cuts it off.
  ++hub_.closing;
  auto timer = std::make_shared<net::steady_timer>(ws_.get_executor(), std::chrono::milliseconds(300));
  timer->async_wait([self](beast::error_code ec) {
    if (ec) return;
    beast::error_code ignored;
    beast::get_lowest_layer(self->ws_).socket().close(ignored);
  });
  ws_.async_close(websocket::close_code::going_away, [self, timer](beast::error_code) {
    timer->cancel();
    beast::error_code ignored;
    beast::get_lowest_layer(self->ws_).socket().close(ignored);
    --self->hub_.closing;
  });
}

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, Hub& hub, std::size_t buffer)
      : stream_(std::move(socket)), hub_(hub), buffer_size_(buffer) {}

  void start() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) {
                       if (!ec) self->handle();
                     });
  }

 private:
  void handle() {
    if (websocket::is_upgrade(req_)) {
      auto client = std::make_shared<WsClient>(stream_.release_socket(), hub_, buffer_size_);
      client->start(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    res->set(http::field::content_type, "application/json");
    if (req_.method() == http::verb::get && req_.target() == "/health") {
      res->result(http::status::ok);
      res->body() = nlohmann::json{{"status", hub_.stopping ? "stopping" : "ok"},
                                   {"tick", hub_.sim_tick.load()},
                                   {"steps", hub_.steps.load()},
                                   {"paused", hub_.paused.load()},
                                   {"clients", hub_.client_count.load()}}
                        .dump();
    } else {
      res->result(http::status::not_found);
      res->body() = R"({"status":"not_found"})";
    }
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  Hub& hub_;
  std::size_t buffer_size_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

struct TeleopServer::Impl {
  Impl(ScenarioConfig cfg, ServeOptions opts)
      : config(std::move(cfg)),
        options(std::move(opts)),
        session(config, true),
        hub(hello_message(config, session.envelope()).dump()),
        acceptor(hub.ioc) {}

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<HttpConnection>(std::move(socket), hub, options.client_buffer)->start();
      accept();
    });
  }

  void handle_inbox() {
    for (Inbound& in : hub.drain()) {
      try {
        const CommandMessage cmd = parse_command(in.text);
        std::string reason;
        const SubmitResult r = session.submit(cmd, &reason);
        if (r == SubmitResult::rejected) hub.reply(in.from, error_message(reason, cmd.sequence_number).dump());
      } catch (const MessageError& e) {
        hub.reply(in.from, error_message(e.what()).dump());
      }
    }
  }

  ScenarioConfig config;
  ServeOptions options;
  TeleopSession session;
  Hub hub;
  tcp::acceptor acceptor;
  std::thread io_thread;
  std::optional<net::executor_work_guard<net::io_context::executor_type>> work;
  bool listening = false;
};

TeleopServer::TeleopServer(ScenarioConfig config, ServeOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(options))) {}

TeleopServer::~TeleopServer() {
  stop();
  if (impl_->io_thread.joinable()) {
    impl_->work.reset();
    impl_->hub.ioc.stop();
    impl_->io_thread.join();
  }
}

unsigned short TeleopServer::listen() {
  Impl& s = *impl_;
  try {
    const tcp::endpoint ep(net::ip::make_address(s.options.host), s.options.port);
    s.acceptor.open(ep.protocol());
    s.acceptor.set_option(net::socket_base::reuse_address(true));
    s.acceptor.bind(ep);
    s.acceptor.listen(net::socket_base::max_listen_connections);
  } catch (const boost::system::system_error& e) {
    beast::error_code ignored;
    s.acceptor.close(ignored);
    throw std::system_error(std::error_code(e.code()),
                            "cannot listen on " + s.options.host + ":" + std::to_string(s.options.port));
  }
  s.listening = true;
  s.accept();
  s.work.emplace(net::make_work_guard(s.hub.ioc));
  s.io_thread = std::thread([&s] { s.hub.ioc.run(); });
  return s.acceptor.local_endpoint().port();
}

void TeleopServer::run() {
  Impl& s = *impl_;
  using Clock = std::chrono::steady_clock;
  const double period = 1.0 / s.config.control_rate_hz;
  const double speed = s.options.speed > 0.0 ? s.options.speed : 1.0;
  const auto start = Clock::now();

  while (!s.hub.stopping) {
    if (s.options.max_steps >= 0 && s.session.steps() >= s.options.max_steps) break;
    s.handle_inbox();
    const std::optional<StateMessage> state = s.session.step();
    s.hub.steps = s.session.steps();
    s.hub.sim_tick = s.session.sim_tick();
    s.hub.paused = s.session.paused();
    if (state) s.hub.broadcast(std::make_shared<const std::string>(to_json(*state).dump()));
    if (!s.options.turbo) {
      const auto due = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(
                                   static_cast<double>(s.session.steps()) * period / speed));
      std::this_thread::sleep_until(due);
    } else {
      std::this_thread::yield();
    }
  }
  s.hub.stopping = true;

  if (s.options.record_dir) {
    try {
      write_recording(*s.options.record_dir, s.config, s.session);
    } catch (const std::exception& e) {
      std::cerr << "warning: recording not written: " << e.what() << '\n';
    }
  }

  if (s.listening) {
    std::promise<void> posted;
    net::post(s.hub.ioc, [&s, &posted] {
      beast::error_code ignored;
      s.acceptor.close(ignored);
      const auto clients = s.hub.clients;
      for (const auto& c : clients) c->close();
      posted.set_value();
    });
    s.work.reset();
    // Give close frames a moment, then stop regardless of slow peers.
    const auto deadline = Clock::now() + std::chrono::seconds(1);
    posted.get_future().wait_until(deadline);
    while (s.hub.closing > 0 && Clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    s.hub.ioc.stop();
    if (s.io_thread.joinable()) s.io_thread.join();
    s.listening = false;
  }
}

void TeleopServer::stop() { impl_->hub.stopping = true; }

std::int64_t TeleopServer::steps() const { return impl_->hub.steps; }

std::size_t TeleopServer::client_count() const { return impl_->hub.client_count; }

const TeleopSession& TeleopServer::session() const { return impl_->session; }

void write_recording(const std::filesystem::path& dir, const ScenarioConfig& config,
                     const TeleopSession& session) {
  std::filesystem::create_directories(dir);
  const std::string stem = config.name;
  auto open = [&](const std::string& suffix) {
    std::ofstream out(dir / (stem + suffix), std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + (dir / (stem + suffix)).string());
    return out;
  };
  {
    std::ofstream out = open(".trace.csv");
    write_trace_csv(out, session.trace());
    if (!out) throw std::runtime_error("write failed for trace");
  }
  {
    std::ofstream out = open(".commands.jsonl");
    write_command_log(out, session.command_log());
    if (!out) throw std::runtime_error("write failed for command log");
  }
  {
    const ScenarioConfig& effective = session.simulator().config();
    nlohmann::json doc;
    if (!session.trace().empty()) {
      doc = summary_document(summarize(session.trace(), effective.limits, effective.desired_pose), effective);
    } else {
      doc = {{"scenario", effective.name}, {"ticks", 0}, {"config", to_json(effective)}};
    }
    doc["steps"] = session.steps();
    std::ofstream out = open(".summary.json");
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for summary");
  }
}

}  // namespace forcecbf::teleop

// Interactive layout server: one layout session per WebSocket connection,
// plus plain HTTP for static files (the browser client).

#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <CLI11.hpp>

#include "gridlay/service.hpp"

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
namespace fs = std::filesystem;
using tcp = net::ip::tcp;

namespace {

struct Config {
    fs::path root;
    gridlay::PipelineOptions layout;
    double max_rate = 60.0;
};

void report(beast::error_code ec, const char* what) {
    if (ec == net::error::operation_aborted || ec == websocket::error::closed) return;
    std::cerr << what << ": " << ec.message() << '\n';
}

std::string mime_type(const fs::path& p) {
    const std::string ext = p.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html";
    if (ext == ".js" || ext == ".mjs") return "application/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    return "application/octet-stream";
}

/// Maps a request target onto a file below root, refusing anything that escapes it.
std::optional<fs::path> resolve(const fs::path& root, std::string_view target) {
    if (root.empty()) return std::nullopt;
    std::string path(target.substr(0, target.find('?')));
    if (path.empty() || path[0] != '/') return std::nullopt;
    if (path.back() == '/') path += "index.html";
    fs::path rel = fs::path(path.substr(1)).lexically_normal();
    if (rel.empty() || *rel.begin() == "..") return std::nullopt;
    return root / rel;
}

http::response<http::string_body> static_response(const Config& cfg, const http::request<http::string_body>& req) {
    auto reply = [&](http::status status, std::string body, const std::string& type) {
        http::response<http::string_body> res{status, req.version()};
        res.set(http::field::server, "gridlay-serve");
        res.set(http::field::content_type, type);
        res.keep_alive(req.keep_alive());
        res.body() = std::move(body);
        res.prepare_payload();
        return res;
    };
    if (req.method() != http::verb::get && req.method() != http::verb::head)
        return reply(http::status::bad_request, "unsupported method\n", "text/plain");
    auto target = req.target();
    auto file = resolve(cfg.root, std::string_view(target.data(), target.size()));
    if (!file || !fs::is_regular_file(*file)) return reply(http::status::not_found, "not found\n", "text/plain");
    std::ifstream in(*file, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    auto res = reply(http::status::ok, body.str(), mime_type(*file));
    if (req.method() == http::verb::head) res.body().clear();
    return res;
}

class WsSession : public std::enable_shared_from_this<WsSession> {
  public:
    WsSession(tcp::socket&& socket, const Config& cfg) : ws_(std::move(socket)), cfg_(cfg) {}

    ~WsSession() {
        if (worker_) worker_->stop();
    }

    void start(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
    }

  private:
    void on_accept(beast::error_code ec) {
        if (ec) return report(ec, "accept");
        std::weak_ptr<WsSession> weak = shared_from_this();
        auto executor = ws_.get_executor();
        // The worker thread hands events to the connection's executor for writing.
        worker_ = std::make_unique<gridlay::service::SessionWorker>(
            [weak, executor](const std::string& text) {
                net::post(executor, [weak, text] {
                    if (auto self = weak.lock()) self->send(text);
                });
            },
            cfg_.layout, cfg_.max_rate);
        read();
    }

    void read() { ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this())); }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            if (worker_) worker_->stop();
            return report(ec, "read");
        }
        worker_->post(beast::buffers_to_string(buffer_.data()));
        buffer_.consume(buffer_.size());
        read();
    }

    void send(std::string text) {
        outbox_.push_back(std::move(text));
        if (outbox_.size() == 1) write_next();
    }

    void write_next() {
        ws_.text(true);
        ws_.async_write(net::buffer(outbox_.front()), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) return report(ec, "write");
        outbox_.pop_front();
        if (!outbox_.empty()) write_next();
    }

    websocket::stream<beast::tcp_stream> ws_;
    const Config& cfg_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    std::unique_ptr<gridlay::service::SessionWorker> worker_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
  public:
    HttpSession(tcp::socket&& socket, const Config& cfg) : stream_(std::move(socket)), cfg_(cfg) {}

    void start() {
        net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::read, shared_from_this()));
    }

  private:
    void read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec == http::error::end_of_stream) {
            stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            return;
        }
        if (ec) return report(ec, "http read");
        if (websocket::is_upgrade(req_)) {
            stream_.expires_never();
            std::make_shared<WsSession>(stream_.release_socket(), cfg_)->start(std::move(req_));
            return;
        }
        res_ = std::make_shared<http::response<http::string_body>>(static_response(cfg_, req_));
        http::async_write(stream_, *res_,
                          beast::bind_front_handler(&HttpSession::on_write, shared_from_this(), res_->keep_alive()));
    }

    void on_write(bool keep_alive, beast::error_code ec, std::size_t) {
        if (ec) return report(ec, "http write");
        if (!keep_alive) {
            stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            return;
        }
        read();
    }

    beast::tcp_stream stream_;
    const Config& cfg_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
    std::shared_ptr<http::response<http::string_body>> res_;
};

class Listener : public std::enable_shared_from_this<Listener> {
  public:
    Listener(net::io_context& ioc, tcp::endpoint endpoint, const Config& cfg)
        : ioc_(ioc), acceptor_(net::make_strand(ioc)), cfg_(cfg) {
        acceptor_.open(endpoint.protocol());
        acceptor_.set_option(net::socket_base::reuse_address(true));
        acceptor_.bind(endpoint);
        acceptor_.listen(net::socket_base::max_listen_connections);
    }

    unsigned short port() const { return acceptor_.local_endpoint().port(); }

    void run() { accept(); }

  private:
    void accept() {
        acceptor_.async_accept(net::make_strand(ioc_), beast::bind_front_handler(&Listener::on_accept, shared_from_this()));
    }

    void on_accept(beast::error_code ec, tcp::socket socket) {
        if (ec)
            report(ec, "accept");
        else
            std::make_shared<HttpSession>(std::move(socket), cfg_)->start();
        accept();
    }

    net::io_context& ioc_;
    tcp::acceptor acceptor_;
    const Config& cfg_;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-like graph layout: interactive WebSocket server"};
    std::string address = "127.0.0.1";
    unsigned short port = 8080;
    std::string root;
    std::string mode = "NS";
    int threads = 1;
    Config cfg;
    app.add_option("--address", address, "Listen address");
    app.add_option("--port", port, "Listen port (0 picks a free one)");
    app.add_option("--static", root, "Directory served over plain HTTP")->check(CLI::ExistingDirectory);
    app.add_option("--mode", mode, "Initial layout mode");
    app.add_option("--tau", cfg.layout.tau, "Grid size")->check(CLI::PositiveNumber);
    app.add_option("--ideal-edge", cfg.layout.ideal_edge, "Ideal edge length")->check(CLI::PositiveNumber);
    app.add_option("--rate", cfg.max_rate, "Snapshot rate cap per second")->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "I/O threads")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors share one exit status
    }

    auto m = gridlay::parse_mode(mode);
    if (!m) {
        std::cerr << "unknown mode '" << mode << "'\n";
        return 2;
    }
    cfg.layout.mode = *m;
    if (!root.empty()) cfg.root = fs::canonical(root);

    net::io_context ioc{threads};
    std::shared_ptr<Listener> listener;
    try {
        listener = std::make_shared<Listener>(ioc, tcp::endpoint{net::ip::make_address(address), port}, cfg);
    } catch (const std::exception& e) {
        std::cerr << "cannot listen on " << address << ':' << port << ": " << e.what() << '\n';
        return 1;
    }
    listener->run();
    std::cout << "listening on ws://" << address << ':' << listener->port() << '/' << std::endl;

    net::signal_set signals(ioc, SIGINT, SIGTERM);
    signals.async_wait([&](beast::error_code, int) { ioc.stop(); });

    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back([&] { ioc.run(); });
    ioc.run();
    for (auto& t : pool) t.join();
    return 0;
}

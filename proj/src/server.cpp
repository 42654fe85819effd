#include "vhslice/server.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <csignal>
#include <deque>
#include <optional>
#include <thread>
#include <vector>

namespace vhs {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace asio = boost::asio;
using tcp = asio::ip::tcp;

namespace {

// Larger than the protocol limit so oversized texts reach the session and get an error reply.
constexpr std::size_t kTransportMessageMax = 16u << 20;

struct Shared {
    std::shared_ptr<const VolumeCatalog> catalog;
    ServerLog log;
    std::function<void(Session&)> setup;
    std::atomic<std::uint64_t> next_id{1};

    void say(const std::string& line) const
    {
        if (log) {
            log(line);
        }
    }
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
public:
    WsConnection(tcp::socket&& socket, std::shared_ptr<Shared> shared)
        : ws_(std::move(socket)), shared_(std::move(shared)), session_(shared_->catalog),
          id_(shared_->next_id++)
    {
        if (shared_->setup) {
            shared_->setup(session_);
        }
    }

    void start(http::request<http::string_body> req)
    {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.read_message_max(kTransportMessageMax);
        ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec)
    {
        if (ec) {
            shared_->say("session " + std::to_string(id_) + ": handshake failed: " + ec.message());
            return;
        }
        shared_->say("session " + std::to_string(id_) + ": opened");
        read();
    }

    void read()
    {
        ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t)
    {
        if (ec) {
            shared_->say("session " + std::to_string(id_) + ": closed");
            return;
        }
        const std::string text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        const VolumeEntry* before = session_.volume();
        auto replies = session_.handle_text(text);
        if (session_.volume() != before && session_.volume() != nullptr) {
            shared_->say("session " + std::to_string(id_) + ": volume " + session_.volume()->id);
        }
        for (auto& r : replies) {
            outbox_.push_back(std::move(r));
        }
        if (!writing_) {
            write_next();
        }
        read();
    }

    void write_next()
    {
        if (outbox_.empty()) {
            writing_ = false;
            return;
        }
        writing_ = true;
        ws_.text(true);
        ws_.async_write(asio::buffer(outbox_.front()),
                        beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t)
    {
        if (ec) {
            return;
        }
        outbox_.pop_front();
        write_next();
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::shared_ptr<Shared> shared_;
    Session session_;
    std::uint64_t id_;
    std::deque<std::string> outbox_;
    bool writing_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
public:
    HttpConnection(tcp::socket&& socket, std::shared_ptr<Shared> shared)
        : stream_(std::move(socket)), shared_(std::move(shared))
    {
    }

    void start() { read(); }

private:
    void read()
    {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t)
    {
        if (ec) {
            beast::error_code ignored;
            stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
            return;
        }
        if (websocket::is_upgrade(req_)) {
            if (req_.target() == "/session") {
                stream_.expires_never();
                std::make_shared<WsConnection>(stream_.release_socket(), shared_)->start(std::move(req_));
                return;
            }
            respond(http::status::not_found, "text/plain", "no such endpoint\n");
            return;
        }
        if (req_.method() == http::verb::get && req_.target() == "/volumes") {
            respond(http::status::ok, "application/json", volumes_listing(*shared_->catalog).dump());
            return;
        }
        respond(http::status::not_found, "text/plain", "no such endpoint\n");
    }

    void respond(http::status status, const char* type, std::string body)
    {
        auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
        res->set(http::field::content_type, type);
        res->keep_alive(req_.keep_alive());
        res->body() = std::move(body);
        res->prepare_payload();
        http::async_write(stream_, *res,
                          [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
                              if (ec || !res->keep_alive()) {
                                  beast::error_code ignored;
                                  self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
                                  return;
                              }
                              self->read();
                          });
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
    std::shared_ptr<Shared> shared_;
};

} // namespace

struct Server::Impl {
    asio::io_context ioc;
    tcp::acceptor acceptor{ioc};
    std::shared_ptr<Shared> shared = std::make_shared<Shared>();
    std::optional<asio::signal_set> signals;

    void accept()
    {
        acceptor.async_accept(asio::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec == asio::error::operation_aborted) {
                    return;
                }
            } else {
                std::make_shared<HttpConnection>(std::move(socket), shared)->start();
            }
            accept();
        });
    }
};

Server::Server(std::shared_ptr<const VolumeCatalog> catalog, const std::string& address, std::uint16_t port,
               ServerLog log)
    : impl_(std::make_unique<Impl>())
{
    impl_->shared->catalog = std::move(catalog);
    impl_->shared->log = std::move(log);
    const tcp::endpoint endpoint(asio::ip::make_address(address), port);
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen(asio::socket_base::max_listen_connections);
    impl_->accept();
}

Server::~Server() = default;

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::set_session_setup(std::function<void(Session&)> setup) { impl_->shared->setup = std::move(setup); }

void Server::run(unsigned threads)
{
    std::vector<std::thread> extra;
    for (unsigned n = 1; n < threads; ++n) {
        extra.emplace_back([this] { impl_->ioc.run(); });
    }
    impl_->ioc.run();
    for (auto& t : extra) {
        t.join();
    }
}

void Server::stop_on_signals()
{
    impl_->signals.emplace(impl_->ioc, SIGINT, SIGTERM);
    impl_->signals->async_wait([this](beast::error_code ec, int sig) {
        if (!ec) {
            impl_->shared->say("signal " + std::to_string(sig) + ": shutting down");
            impl_->ioc.stop();
        }
    });
}

void Server::stop() { impl_->ioc.stop(); }

json volumes_listing(const VolumeCatalog& catalog) { return {{"volumes", catalog.ids()}}; }

} // namespace vhs

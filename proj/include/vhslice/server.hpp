#pragma once

#include "vhslice/service.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

namespace vhs {

using ServerLog = std::function<void(const std::string&)>;

/// HTTP + WebSocket front end: `GET /volumes` and the `/session` protocol.
/// Each connection owns one Session driven from its own strand.
class Server {
public:
    /// Binds immediately; throws boost::system::system_error when the address
    /// is unusable (for example, the port is already taken). Port 0 picks a free one.
    Server(std::shared_ptr<const VolumeCatalog> catalog, const std::string& address, std::uint16_t port,
           ServerLog log = {});
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    std::uint16_t port() const;

    /// Serves on `threads` worker threads until stop().
    void run(unsigned threads = 1);

    /// Stops the server on SIGINT or SIGTERM. Call before run().
    void stop_on_signals();

    /// Safe from any thread or signal-handling context of the io loop.
    void stop();

    /// Extra hook applied to every new session (tests use it for synthetic costs).
    void set_session_setup(std::function<void(Session&)> setup);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

json volumes_listing(const VolumeCatalog& catalog);

} // namespace vhs

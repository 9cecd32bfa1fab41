#pragma once
// Linked-data HTTP front end: dereferenceable resource URIs with 303
// content negotiation, Turtle/N-Triples documents under /data, HTML
// pages under /page, and the /sparql endpoint. All shared state is
// immutable after startup; requests never mutate it.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mirlod/mapping.hpp"
#include "mirlod/pipeline.hpp"
#include "mirlod/query.hpp"

namespace mirlod::server {

struct RouteTarget {
    enum class Kind { Root, Resource, Data, Page, Sparql, NotFound };
    Kind kind = Kind::NotFound;
    std::string classmap;                // path segment after /resource ("hairpins", "changes")
    std::string key;                     // remaining key segments, still percent-encoded
    std::optional<std::string> version;  // trailing version label, when present

    bool operator==(const RouteTarget&) const = default;
};

// Purely syntactic: a trailing label-shaped segment on a resource path is
// the version; change resources keep everything after "changes/" in key.
RouteTarget route(std::string_view path);

struct HttpRequest {
    std::string method = "GET";
    std::string path = "/";
    std::map<std::string, std::string> params;  // query string / form fields
    std::string accept;
    std::string content_type;
    std::string body;
    std::string if_none_match;
};

struct HttpResponse {
    int status = 200;
    std::string content_type;
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
};

class LodServer {
public:
    // `build` must outlive the server.
    LodServer(const pipeline::Build& build, std::string base);
    ~LodServer();

    LodServer(const LodServer&) = delete;
    LodServer& operator=(const LodServer&) = delete;

    // Pure request handler; the HTTP listener is a thin adapter over it.
    HttpResponse handle(const HttpRequest& request) const;

    // Called by the HTTP adapter after each request.
    std::function<void(const HttpRequest&, const HttpResponse&)> logger;

    const mapping::VirtualGraph& graph() const;
    const rdf::TripleStore& store() const;
    const std::string& base() const;

    // Blocking listeners. listen() returns false when the bind fails.
    bool listen(const std::string& host, int port);
    int bind_any(const std::string& host);  // returns the port, -1 on failure
    bool listen_after_bind();
    void stop();

private:
    HttpResponse dereference(const RouteTarget& target, const HttpRequest& request) const;
    HttpResponse data_document(const RouteTarget& target, const HttpRequest& request) const;
    HttpResponse page_document(const RouteTarget& target, const HttpRequest& request) const;
    HttpResponse sparql_endpoint(const HttpRequest& request) const;
    HttpResponse root_page() const;

    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mirlod::server

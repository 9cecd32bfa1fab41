#include "mirlod/server.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>

#include <httplib.h>

#include "mirlod/util.hpp"

namespace mirlod::server {

using rdf::Triple;

// ---------------------------------------------------------------------------
// routing

RouteTarget route(std::string_view path) {
    if (path == "/" || path.empty()) return {RouteTarget::Kind::Root, {}, {}, {}};
    if (path == "/sparql") return {RouteTarget::Kind::Sparql, {}, {}, {}};

    RouteTarget::Kind kind;
    std::string_view rest;
    if (path.substr(0, 10) == "/resource/") {
        kind = RouteTarget::Kind::Resource;
        rest = path.substr(10);
    } else if (path.substr(0, 6) == "/data/") {
        kind = RouteTarget::Kind::Data;
        rest = path.substr(6);
    } else if (path.substr(0, 6) == "/page/") {
        kind = RouteTarget::Kind::Page;
        rest = path.substr(6);
    } else {
        return {};
    }

    auto segments = util::split(rest, '/');
    if (segments.size() < 2 || segments[0].empty()) return {};
    for (const auto& s : segments)
        if (s.empty()) return {};

    RouteTarget target;
    target.kind = kind;
    target.classmap = std::string(segments[0]);

    if (target.classmap == "changes") {
        // /resource/changes/<entity>/<label>/<TYPE>[/<parent>]
        std::string key;
        for (std::size_t i = 1; i < segments.size(); ++i) {
            if (i > 1) key += '/';
            key += std::string(segments[i]);
        }
        target.key = std::move(key);
        return target;
    }

    std::size_t key_end = segments.size();
    if (segments.size() >= 3 && util::is_version_label(segments.back())) {
        target.version = std::string(segments.back());
        --key_end;
    }
    std::string key;
    for (std::size_t i = 1; i < key_end; ++i) {
        if (i > 1) key += '/';
        key += std::string(segments[i]);
    }
    target.key = std::move(key);
    return target;
}

// ---------------------------------------------------------------------------
// accept negotiation

namespace {

// q-value of the best match for `type` in an Accept header; -1 when the
// header does not accept it at all.
double accept_q(std::string_view accept, std::string_view type) {
    if (accept.empty()) return -1.0;
    std::string_view major = type.substr(0, type.find('/'));
    double best = -1.0;
    int best_specificity = -1;
    for (auto part : util::split(accept, ',')) {
        auto fields = util::split(part, ';');
        std::string_view media = fields[0];
        while (!media.empty() && media.front() == ' ') media.remove_prefix(1);
        while (!media.empty() && media.back() == ' ') media.remove_suffix(1);
        double q = 1.0;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            auto f = fields[i];
            while (!f.empty() && f.front() == ' ') f.remove_prefix(1);
            if (f.substr(0, 2) == "q=") {
                try {
                    q = std::stod(std::string(f.substr(2)));
                } catch (...) {
                    q = 0.0;
                }
            }
        }
        int specificity;
        if (media == type) specificity = 2;
        else if (media == std::string(major) + "/*") specificity = 1;
        else if (media == "*/*") specificity = 0;
        else continue;
        if (specificity > best_specificity) {
            best_specificity = specificity;
            best = q;
        }
    }
    return best;
}

bool prefers_html(const std::string& accept) {
    double html = accept_q(accept, "text/html");
    double rdf = std::max(accept_q(accept, "text/turtle"), accept_q(accept, "application/n-triples"));
    if (html < 0 && rdf < 0) return false;  // no preference: RDF
    return html > rdf;
}

bool prefers_ntriples(const std::string& accept) {
    return accept_q(accept, "application/n-triples") > accept_q(accept, "text/turtle");
}

std::string html_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// server

struct LodServer::Impl {
    const pipeline::Build& build;
    std::string base;
    mapping::VirtualGraph engine;
    rdf::TripleStore store;
    std::vector<std::pair<std::string, std::string>> turtle_prefixes;
    query::PrefixMap query_prefixes;
    std::string etag;
    httplib::Server http;
    std::atomic<int> bound_port{-1};

    Impl(const pipeline::Build& b, std::string base_iri)
        : build(b),
          base(std::move(base_iri)),
          engine(b.spec, b.tables, b.history, b.registry, base),
          store(mapping::build_graph(engine, mapping::Scope::All)) {
        const std::string& vocab = b.spec.vocab_ns();
        turtle_prefixes = {
            {"rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"},
            {"rdfs", "http://www.w3.org/2000/01/rdf-schema#"},
            {"owl", "http://www.w3.org/2002/07/owl#"},
            {"diana", vocab},
        };
        query_prefixes = query::default_prefixes(vocab);
        etag = "\"" + b.content_hash + "\"";
    }
};

LodServer::LodServer(const pipeline::Build& build, std::string base)
    : impl_(std::make_unique<Impl>(build, std::move(base))) {}

LodServer::~LodServer() = default;

const mapping::VirtualGraph& LodServer::graph() const { return impl_->engine; }
const rdf::TripleStore& LodServer::store() const { return impl_->store; }
const std::string& LodServer::base() const { return impl_->base; }

namespace {

struct TargetResult {
    int status = 200;
    std::vector<Triple> triples;
    std::string forward_iri;  // set on 410
    std::string message;
};

}  // namespace

// Resolves a resource/data/page target to its triples, a 404, or a 410
// with the forward link for FW-deleted hairpins at post-deletion versions.
static TargetResult resolve_target(const LodServer& srv, const mapping::VirtualGraph& engine,
                                   const RouteTarget& target) {
    const std::string& base = srv.base();
    TargetResult result;

    if (target.classmap == "changes") {
        try {
            result.triples = engine.change_triples_for_uri(base + "/resource/changes/" + target.key);
        } catch (const mapping::UnknownResource& e) {
            result.status = 404;
            result.message = e.what();
        }
        return result;
    }

    std::string uri = base + "/resource/" + target.classmap + "/" + target.key;

    // kind of entity this classmap path projects, for the 410 logic
    auto death_of = [&](const std::string& encoded_key) -> std::optional<history::History::Death> {
        auto decoded = util::percent_decode(encoded_key);
        if (!decoded) return std::nullopt;
        if (util::is_hairpin_id(*decoded))
            return engine.hist().death(*decoded, history::EntityKind::Hairpin);
        if (util::is_mature_id(*decoded))
            return engine.hist().death(*decoded, history::EntityKind::Mature);
        return std::nullopt;
    };
    auto forward_uri = [&](const std::string& id) {
        return base + "/resource/" + target.classmap + "/" + util::percent_encode(id);
    };

    if (target.version) {
        try {
            result.triples = engine.versioned_triples(uri + "/" + *target.version, *target.version);
        } catch (const mapping::NotAliveAtVersion& e) {
            auto death = death_of(target.key);
            if (death && death->change == history::ChangeType::Fw && death->forward_to &&
                engine.registry().has(*target.version) &&
                engine.registry().ordinal_of(*target.version) > death->at) {
                result.status = 410;
                result.forward_iri = forward_uri(*death->forward_to);
                result.message = "gone; replaced by " + result.forward_iri;
            } else {
                result.status = 404;
                result.message = e.what();
            }
        } catch (const mapping::UnknownResource& e) {
            result.status = 404;
            result.message = e.what();
        }
        return result;
    }

    try {
        result.triples = engine.triples_for_resource(uri);
    } catch (const mapping::UnknownResource& e) {
        auto death = death_of(target.key);
        if (death && death->change == history::ChangeType::Fw && death->forward_to) {
            result.status = 410;
            result.forward_iri = forward_uri(*death->forward_to);
            result.message = "gone; replaced by " + result.forward_iri;
        } else {
            result.status = 404;
            result.message = e.what();
        }
    }
    return result;
}

HttpResponse LodServer::dereference(const RouteTarget& target, const HttpRequest& request) const {
    TargetResult resolved = resolve_target(*this, impl_->engine, target);
    if (resolved.status == 404) return {404, "text/plain", resolved.message + "\n", {}};
    if (resolved.status == 410) {
        HttpResponse response{410, "text/plain", resolved.message + "\n", {}};
        response.headers.emplace_back("Link",
                                      "<" + resolved.forward_iri + ">; rel=\"successor-version\"");
        return response;
    }
    std::string location = (prefers_html(request.accept) ? "/page/" : "/data/") + target.classmap +
                           "/" + target.key;
    if (target.version) location += "/" + *target.version;
    HttpResponse response{303, "text/plain", "see " + location + "\n", {}};
    response.headers.emplace_back("Location", location);
    return response;
}

HttpResponse LodServer::data_document(const RouteTarget& target, const HttpRequest& request) const {
    TargetResult resolved = resolve_target(*this, impl_->engine, target);
    if (resolved.status == 404) return {404, "text/plain", resolved.message + "\n", {}};
    if (resolved.status == 410) {
        HttpResponse response{410, "text/plain", resolved.message + "\n", {}};
        response.headers.emplace_back("Link",
                                      "<" + resolved.forward_iri + ">; rel=\"successor-version\"");
        return response;
    }
    if (!request.if_none_match.empty() && request.if_none_match == impl_->etag)
        return {304, "text/plain", "", {{"ETag", impl_->etag}}};
    HttpResponse response;
    if (prefers_ntriples(request.accept)) {
        response.content_type = "application/n-triples";
        response.body = rdf::serialize_ntriples(resolved.triples);
    } else {
        response.content_type = "text/turtle";
        response.body = rdf::serialize_turtle(resolved.triples, impl_->turtle_prefixes);
    }
    response.headers.emplace_back("ETag", impl_->etag);
    return response;
}

HttpResponse LodServer::page_document(const RouteTarget& target, const HttpRequest& request) const {
    TargetResult resolved = resolve_target(*this, impl_->engine, target);
    if (resolved.status == 404) return {404, "text/plain", resolved.message + "\n", {}};
    if (resolved.status == 410) {
        std::string body = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Gone"
                           "</title></head><body><h1>410 Gone</h1><p>Replaced by <a href=\"" +
                           html_escape(resolved.forward_iri) + "\">" +
                           html_escape(resolved.forward_iri) + "</a></p></body></html>\n";
        HttpResponse response{410, "text/html", std::move(body), {}};
        response.headers.emplace_back("Link",
                                      "<" + resolved.forward_iri + ">; rel=\"successor-version\"");
        return response;
    }
    if (!request.if_none_match.empty() && request.if_none_match == impl_->etag)
        return {304, "text/plain", "", {{"ETag", impl_->etag}}};

    std::string uri = impl_->base + "/resource/" + target.classmap + "/" + target.key;
    if (target.version) uri += "/" + *target.version;

    auto shorten = [&](const std::string& iri) -> std::string {
        for (const auto& [prefix, ns] : impl_->turtle_prefixes)
            if (iri.size() > ns.size() && iri.compare(0, ns.size(), ns) == 0)
                return prefix + ":" + iri.substr(ns.size());
        return iri;
    };

    std::vector<Triple> triples = std::move(resolved.triples);
    std::sort(triples.begin(), triples.end());
    triples.erase(std::unique(triples.begin(), triples.end()), triples.end());

    std::string body = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" +
                       html_escape(uri) + "</title></head>\n<body>\n<h1>" + html_escape(uri) +
                       "</h1>\n<table border=\"1\" cellpadding=\"4\">\n"
                       "<tr><th>property</th><th>value</th></tr>\n";
    const std::string resource_prefix = impl_->base + "/resource/";
    for (const auto& t : triples) {
        body += "<tr><td>" + html_escape(shorten(t.predicate.value)) + "</td><td>";
        if (t.object.is_iri()) {
            std::string href = t.object.value;
            if (href.compare(0, resource_prefix.size(), resource_prefix) == 0)
                href = "/page/" + href.substr(resource_prefix.size());
            body += "<a href=\"" + html_escape(href) + "\">" + html_escape(t.object.value) + "</a>";
        } else {
            body += html_escape(t.object.value);
        }
        body += "</td></tr>\n";
    }
    body += "</table>\n</body></html>\n";
    HttpResponse response{200, "text/html", std::move(body), {}};
    response.headers.emplace_back("ETag", impl_->etag);
    return response;
}

HttpResponse LodServer::sparql_endpoint(const HttpRequest& request) const {
    if (request.method != "GET" && request.method != "POST")
        return {405, "text/plain", "use GET ?query= or POST\n", {}};

    std::string text;
    auto it = request.params.find("query");
    if (it != request.params.end()) text = it->second;
    if (text.empty() && request.method == "POST" &&
        request.content_type.find("application/sparql-query") != std::string::npos)
        text = request.body;
    if (text.empty()) return {400, "text/plain", "missing query parameter\n", {}};

    query::BindingSet results;
    try {
        query::Query q = query::parse_query(text, impl_->query_prefixes);
        results = query::evaluate(q, impl_->store);
    } catch (const Error& e) {
        return {400, "text/plain", std::string(e.what()) + "\n", {}};
    }

    if (accept_q(request.accept, "text/tab-separated-values") >
        accept_q(request.accept, "application/sparql-results+json"))
        return {200, "text/tab-separated-values",
                query::serialize_results(results, query::ResultFormat::Tsv), {}};
    return {200, "application/sparql-results+json",
            query::serialize_results(results, query::ResultFormat::Json), {}};
}

HttpResponse LodServer::root_page() const {
    const auto& registry = impl_->build.registry;
    std::string body =
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>miRNA LOD</title></head>\n"
        "<body>\n<h1>miRNA Linked Open Data</h1>\n<ul>\n";
    for (const auto& cm : impl_->build.spec.classmaps)
        body += "<li>" + html_escape(cm.name) + " (" + html_escape(cm.definition_label) + ")</li>\n";
    body += "</ul>\n<p>" + std::to_string(impl_->store.size()) + " triples, " +
            std::to_string(registry.size()) + " releases";
    if (registry.current() > 0)
        body += ", current version " + html_escape(registry.label_of(registry.current()));
    body += "</p>\n<form action=\"/sparql\" method=\"get\">\n"
            "<textarea name=\"query\" rows=\"8\" cols=\"80\"></textarea><br>\n"
            "<input type=\"submit\" value=\"Run query\">\n</form>\n</body></html>\n";
    return {200, "text/html", std::move(body), {}};
}

HttpResponse LodServer::handle(const HttpRequest& request) const {
    RouteTarget target = route(request.path);

    if (target.kind == RouteTarget::Kind::Sparql) return sparql_endpoint(request);

    if (request.method != "GET" && request.method != "HEAD")
        return {405, "text/plain", "method not allowed\n", {}};

    switch (target.kind) {
        case RouteTarget::Kind::Root: return root_page();
        case RouteTarget::Kind::Resource: return dereference(target, request);
        case RouteTarget::Kind::Data: return data_document(target, request);
        case RouteTarget::Kind::Page: return page_document(target, request);
        default: return {404, "text/plain", "no such route\n", {}};
    }
}

// ---------------------------------------------------------------------------
// httplib adapter

namespace {

HttpRequest to_request(const httplib::Request& req) {
    HttpRequest out;
    out.method = req.method;
    out.path = req.path;
    for (const auto& [key, value] : req.params) out.params.emplace(key, value);
    out.accept = req.get_header_value("Accept");
    out.content_type = req.get_header_value("Content-Type");
    out.if_none_match = req.get_header_value("If-None-Match");
    out.body = req.body;
    return out;
}

void to_response(const HttpResponse& in, httplib::Response& res) {
    res.status = in.status;
    for (const auto& [key, value] : in.headers) res.set_header(key, value);
    res.set_content(in.body, in.content_type.empty() ? "text/plain" : in.content_type);
}

}  // namespace

static void register_routes(httplib::Server& http, const LodServer& server) {
    auto handler = [&server](const httplib::Request& req, httplib::Response& res) {
        HttpRequest request = to_request(req);
        HttpResponse response = server.handle(request);
        if (server.logger) server.logger(request, response);
        to_response(response, res);
    };
    http.Get(R"(/.*)", handler);
    http.Post(R"(/.*)", handler);
    http.Put(R"(/.*)", handler);
    http.Delete(R"(/.*)", handler);
    http.Patch(R"(/.*)", handler);
}

bool LodServer::listen(const std::string& host, int port) {
    register_routes(impl_->http, *this);
    impl_->bound_port = port;
    return impl_->http.listen(host, port);
}

int LodServer::bind_any(const std::string& host) {
    register_routes(impl_->http, *this);
    int port = impl_->http.bind_to_any_port(host);
    impl_->bound_port = port;
    return port;
}

bool LodServer::listen_after_bind() { return impl_->http.listen_after_bind(); }

void LodServer::stop() { impl_->http.stop(); }

}  // namespace mirlod::server

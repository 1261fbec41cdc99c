#include "rtfs/http_api.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>

#include "json_util.hpp"
#include "rtfs/time_util.hpp"

namespace rtfs {

using detail::Json;

namespace {

Json optional_time(const std::optional<UtcTime>& t)
{
    return t ? Json(format_utc(*t)) : Json(nullptr);
}

void send_json(httplib::Response& res, int code, const Json& body)
{
    res.status = code;
    res.set_content(body.dump(), "application/json");
}

Json diagnostics(const ValidationError& e)
{
    Json list = Json::array();
    for (const auto& v : e.violations()) {
        list.push_back(Json{{"subject", v.subject}, {"message", v.message}});
    }
    return list;
}

Json summary_json(const ResultSummary& s)
{
    return Json{{"timestamp", format_utc(s.timestamp)},
                {"scenario_label", s.scenario_label},
                {"nadir_hz", s.nadir_hz},
                {"nadir_time", s.nadir_time},
                {"alarm", s.alarm}};
}

UtcTime query_time(const httplib::Request& req, const char* key, UtcTime fallback)
{
    if (!req.has_param(key)) {
        return fallback;
    }
    const std::string value = req.get_param_value(key);
    auto t = parse_utc(value);
    if (!t) {
        throw ParseError(key, 0, 0, std::string("query parameter '") + key + "' is not a UTC time: " + value);
    }
    return *t;
}

// Any exception escaping a handler becomes a 4xx with diagnostics or an
// opaque 500; partially built results never reach the client.
template <typename Handler>
auto guarded(Handler handler)
{
    return [handler](const httplib::Request& req, httplib::Response& res) {
        try {
            handler(req, res);
        } catch (const ValidationError& e) {
            send_json(res, 422, Json{{"error", "invalid request"}, {"diagnostics", diagnostics(e)}});
        } catch (const ParseError& e) {
            send_json(res, 400,
                      Json{{"error", "malformed request"},
                           {"diagnostics", Json::array({Json{{"subject", e.field()}, {"message", e.what()}}})}});
        } catch (const std::exception&) {
            send_json(res, 500, Json{{"error", "internal error"}});
        }
    };
}

} // namespace

std::string status_to_json(const ServiceStatus& s)
{
    Json j{{"health", s.degraded ? "degraded" : "ok"},
           {"alarm", s.alarm},
           {"degraded", s.degraded},
           {"degraded_reasons", s.degraded_reasons},
           {"snapshot_stale", s.snapshot_stale},
           {"storage_ok", s.storage_ok},
           {"last_cycle_time", optional_time(s.last_cycle_time)},
           {"last_snapshot_time", optional_time(s.last_snapshot_time)},
           {"cycles_completed", s.cycles_completed},
           {"sequence", s.sequence},
           {"latest_nadir_hz", s.latest_nadir_hz ? Json(*s.latest_nadir_hz) : Json(nullptr)},
           {"latest_label", s.latest_label}};
    return j.dump();
}

WhatIfRequest parse_whatif_request(std::string_view body)
{
    const Json root = detail::parse_json_text(body);
    detail::object_at(root, "");
    WhatIfRequest request;
    if (const Json* deltas = detail::member(root, "deltas")) {
        detail::object_at(*deltas, "/deltas");
        for (auto it = deltas->begin(); it != deltas->end(); ++it) {
            request.deltas[it.key()] = detail::as_number(it.value(), "/deltas/" + it.key());
        }
    }
    request.allow_unbalanced = detail::boolean_or(root, "allow_unbalanced", "", false);
    if (const Json* scenario = detail::member(root, "scenario")) {
        detail::object_at(*scenario, "/scenario");
        request.trip_unit = detail::string_field(*scenario, "trip_unit", "/scenario");
        if (const Json* stages = detail::member(*scenario, "stages")) {
            if (!stages->is_array()) {
                detail::field_error("/scenario/stages", "expected an array");
            }
            for (std::size_t i = 0; i < stages->size(); ++i) {
                const std::string path = "/scenario/stages/" + std::to_string(i);
                const Json& s = detail::object_at((*stages)[i], path);
                ContingencyStage stage;
                stage.delay_s = detail::number(s, "delay_s", path);
                stage.delta_mw = detail::number_or(s, "delta_mw", path, 0.0);
                if (const Json* unit = detail::member(s, "unit_id")) {
                    if (!unit->is_string()) {
                        detail::field_error(path + "/unit_id", "expected a string");
                    }
                    stage.unit_id = unit->get<std::string>();
                }
                request.stages.push_back(stage);
            }
        }
    }
    return request;
}

struct HttpApi::Impl {
    explicit Impl(RtfsService& s) : service(s) {}

    RtfsService& service;
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> stopping{false};
};

HttpApi::HttpApi(RtfsService& service) : impl_(std::make_unique<Impl>(service))
{
    auto& svc = impl_->service;
    auto& server = impl_->server;
    Impl* impl = impl_.get();

    server.Get("/status", guarded([&svc](const httplib::Request&, httplib::Response& res) {
                   res.set_content(status_to_json(svc.status()), "application/json");
               }));

    server.Get("/result/latest", guarded([&svc](const httplib::Request&, httplib::Response& res) {
                   auto latest = svc.latest_result();
                   if (!latest) {
                       send_json(res, 404, Json{{"error", "no result yet"}});
                       return;
                   }
                   res.set_content(result_to_json(*latest, svc.config().max_transport_points), "application/json");
               }));

    server.Get("/result/history", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                   const UtcTime from = query_time(req, "from", UtcTime{});
                   const UtcTime to = query_time(req, "to", UtcTime::max());
                   Json list = Json::array();
                   for (const auto& s : svc.history(from, to)) {
                       list.push_back(summary_json(s));
                   }
                   send_json(res, 200, Json{{"results", list}});
               }));

    server.Post("/whatif", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                    const WhatIfRequest request = parse_whatif_request(req.body);
                    if (!svc.latest_snapshot()) {
                        send_json(res, 409, Json{{"error", "no operational snapshot available yet"}});
                        return;
                    }
                    const SimulationResult result = svc.whatif(request);
                    res.set_content(result_to_json(result, svc.config().max_transport_points), "application/json");
                }));

    server.Get("/stream", [&svc, impl](const httplib::Request&, httplib::Response& res) {
        auto seen = std::make_shared<std::uint64_t>(0);
        auto first = std::make_shared<bool>(true);
        auto last_result = std::make_shared<std::shared_ptr<const SimulationResult>>();
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream", [&svc, impl, seen, first, last_result](std::size_t, httplib::DataSink& sink) {
                if (impl->stopping) {
                    return false;
                }
                const std::uint64_t sequence =
                    *first ? svc.status().sequence : svc.wait_for_update(*seen, std::chrono::milliseconds(1000));
                if (impl->stopping) {
                    return false;
                }
                std::string message;
                if (*first || sequence != *seen) {
                    message += "event: status\ndata: " + status_to_json(svc.status()) + "\n\n";
                    auto latest = svc.latest_result();
                    if (latest && latest != *last_result) {
                        const Json summary{{"sequence", sequence},
                                           {"scenario_label", latest->scenario_label},
                                           {"snapshot_time", format_utc(latest->snapshot_time)},
                                           {"nadir_hz", latest->nadir_hz},
                                           {"nadir_time", latest->nadir_time},
                                           {"alarm", latest->alarm}};
                        message += "event: result\ndata: " + summary.dump() + "\n\n";
                        *last_result = latest;
                    }
                } else {
                    message = ": keep-alive\n\n";
                }
                *first = false;
                *seen = sequence;
                return sink.write(message.data(), message.size());
            });
    });
}

HttpApi::~HttpApi()
{
    stop();
}

int HttpApi::start(const std::string& host, int port)
{
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound <= 0) {
        throw Error("cannot bind HTTP server to " + host + ":" + std::to_string(port));
    }
    impl_->stopping = false;
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    return bound;
}

void HttpApi::stop()
{
    if (!impl_) {
        return;
    }
    impl_->stopping = true;
    impl_->server.stop();
    if (impl_->thread.joinable()) {
        impl_->thread.join();
    }
}

} // namespace rtfs

#pragma once

// HTTP front end for the operator console.
//
//   GET  /status               service health, alarm, staleness
//   GET  /result/latest        latest result, traces decimated for transport
//   GET  /result/history       ?from=&to= (UTC) stored result summaries
//   POST /whatif               redispatch deltas (+ optional manual trip)
//   GET  /stream               server-sent events: "status" and "result"

#include <memory>
#include <string>
#include <string_view>

#include "rtfs/service.hpp"

namespace rtfs {

std::string status_to_json(const ServiceStatus& status);

/// {"deltas": {"U1": -50, ...}, "allow_unbalanced": false,
///  "scenario": {"trip_unit": "U1", "stages": [{"delay_s": 4, "delta_mw": -110, "unit_id": ""}]}}
WhatIfRequest parse_whatif_request(std::string_view body);

class HttpApi {
public:
    explicit HttpApi(RtfsService& service);
    ~HttpApi();

    HttpApi(const HttpApi&) = delete;
    HttpApi& operator=(const HttpApi&) = delete;

    /// Binds and serves on a background thread. Port 0 picks a free port.
    /// Returns the bound port; throws Error when binding fails.
    int start(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace rtfs

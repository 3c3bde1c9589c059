#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "accforge/errors.hpp"
#include "accforge/jsonl.hpp"
#include "accforge/manifest.hpp"

namespace accforge {

struct EndpointConfig {
    std::string url;            // e.g. http://127.0.0.1:8080/v1/generate
    std::string auth_env;       // name of an env var holding a bearer token; empty = no auth
    size_t parallelism = 1;     // max in-flight requests
    int timeout_ms = 30000;     // per-request connect/read/write timeout
    int retries = 2;            // extra attempts after the first, transport errors only
    int backoff_ms = 250;       // first retry delay, doubled per further retry
};

struct PredictionRow {
    std::string id;
    std::string text;                    // model output when ok
    std::optional<std::string> error;    // failure description when not ok
    int attempts = 1;

    [[nodiscard]] bool ok() const { return !error.has_value(); }
};

namespace infer_detail {

inline std::string base64_encode(const std::string& bytes) {
    static constexpr char kAlphabet[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= bytes.size()) {
        const uint32_t n = (static_cast<uint8_t>(bytes[i]) << 16) |
                           (static_cast<uint8_t>(bytes[i + 1]) << 8) |
                           static_cast<uint8_t>(bytes[i + 2]);
        out.push_back(kAlphabet[(n >> 18) & 63]);
        out.push_back(kAlphabet[(n >> 12) & 63]);
        out.push_back(kAlphabet[(n >> 6) & 63]);
        out.push_back(kAlphabet[n & 63]);
        i += 3;
    }
    const size_t rest = bytes.size() - i;
    if (rest == 1) {
        const uint32_t n = static_cast<uint8_t>(bytes[i]) << 16;
        out.push_back(kAlphabet[(n >> 18) & 63]);
        out.push_back(kAlphabet[(n >> 12) & 63]);
        out.append("==");
    } else if (rest == 2) {
        const uint32_t n = (static_cast<uint8_t>(bytes[i]) << 16) |
                           (static_cast<uint8_t>(bytes[i + 1]) << 8);
        out.push_back(kAlphabet[(n >> 18) & 63]);
        out.push_back(kAlphabet[(n >> 12) & 63]);
        out.push_back(kAlphabet[(n >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

struct ParsedUrl {
    std::string host_port;  // scheme://host:port
    std::string path;       // /path, defaults to "/"
};

inline ParsedUrl parse_url(const std::string& url) {
    const size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        raise(ErrorCode::InvalidArgument, "endpoint url must start with http:// : " + url);
    }
    const size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

}  // namespace infer_detail

// Sends instruction samples to an HTTP generation endpoint, at most
// `parallelism` in flight, and returns one row per sample in input order.
// Transport failures are retried with exponential backoff; a sample that
// still fails gets an error row rather than being dropped.
class InferenceClient {
  public:
    explicit InferenceClient(EndpointConfig config) : config_(std::move(config)) {
        if (config_.url.empty()) raise(ErrorCode::InvalidArgument, "endpoint url is empty");
        if (config_.parallelism == 0) config_.parallelism = 1;
    }

    [[nodiscard]] std::vector<PredictionRow> run(
        const std::vector<InstructionSample>& samples,
        const std::filesystem::path& audio_root) const {
        std::vector<PredictionRow> rows(samples.size());
        if (samples.empty()) return rows;
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= samples.size()) return;
                rows[i] = send_one(samples[i], audio_root);
            }
        };
        const size_t threads = std::min(config_.parallelism, samples.size());
        if (threads <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(threads);
            for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        return rows;
    }

  private:
    [[nodiscard]] PredictionRow send_one(const InstructionSample& sample,
                                         const std::filesystem::path& audio_root) const {
        PredictionRow row;
        row.id = sample.sample_id;

        json body;
        body["prompt"] = sample.prompt;
        json audios = json::array();
        try {
            for (const auto& ref : sample.audio_refs) {
                const std::filesystem::path path =
                    std::filesystem::path(ref).is_absolute() ? std::filesystem::path(ref)
                                                             : audio_root / ref;
                audios.push_back(infer_detail::base64_encode(infer_detail::read_file_bytes(path)));
            }
        } catch (const Error& e) {
            row.error = std::string(to_string(e.code())) + ": " + e.message();
            return row;
        }
        body["audios"] = std::move(audios);
        const std::string payload = body.dump();

        const auto parsed = infer_detail::parse_url(config_.url);
        httplib::Client client(parsed.host_port);
        client.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
        client.set_read_timeout(std::chrono::milliseconds(config_.timeout_ms));
        client.set_write_timeout(std::chrono::milliseconds(config_.timeout_ms));
        httplib::Headers headers;
        if (!config_.auth_env.empty()) {
            if (const char* token = std::getenv(config_.auth_env.c_str())) {
                headers.emplace("Authorization", std::string("Bearer ") + token);
            }
        }

        std::string transport_error;
        for (int attempt = 0; attempt <= config_.retries; ++attempt) {
            row.attempts = attempt + 1;
            if (attempt > 0) {
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(config_.backoff_ms << (attempt - 1)));
            }
            auto res = client.Post(parsed.path, headers, payload, "application/json");
            if (!res) {
                transport_error = httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 500) {
                transport_error = "server returned status " + std::to_string(res->status);
                continue;
            }
            if (res->status != 200) {
                row.error = std::string(to_string(ErrorCode::MalformedResponse)) +
                            ": status " + std::to_string(res->status);
                return row;
            }
            json reply = json::parse(res->body, nullptr, false);
            if (reply.is_discarded() || !reply.is_object() || !reply.contains("text") ||
                !reply["text"].is_string()) {
                row.error = std::string(to_string(ErrorCode::MalformedResponse)) +
                            ": body lacks a \"text\" string";
                return row;
            }
            row.text = reply["text"].get<std::string>();
            return row;
        }
        row.error = std::string(to_string(ErrorCode::EndpointUnreachable)) + ": " +
                    transport_error + " (after " + std::to_string(row.attempts) + " attempts)";
        return row;
    }

    EndpointConfig config_;
};

inline void write_prediction_rows(const std::filesystem::path& path,
                                  const std::vector<PredictionRow>& rows) {
    std::vector<json> records;
    records.reserve(rows.size());
    for (const auto& row : rows) {
        json j;
        j["id"] = row.id;
        if (row.ok()) {
            j["candidate"] = row.text;
        } else {
            j["error"] = *row.error;
        }
        j["attempts"] = row.attempts;
        records.push_back(std::move(j));
    }
    write_jsonl(path, records);
}

}  // namespace accforge

#pragma once

// Report emission (deterministic JSON, CSV traces), the key-value run-config
// parser with strict unknown-key rejection, and the spec hash embedded in
// every report.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kwlab/kw.hpp"
#include "kwlab/solve.hpp"

namespace kwlab {

// Minimal ordered JSON writer with fixed number formatting ("%.17g"), so
// identical inputs produce byte-identical documents.
class JsonWriter {
  public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array(const std::string& key = "");
    JsonWriter& end_array();
    JsonWriter& key(const std::string& k);
    JsonWriter& value(const std::string& v);
    JsonWriter& value(const char* v) { return value(std::string(v)); }
    JsonWriter& value(double v);
    JsonWriter& value(int v);
    JsonWriter& value(long long v);
    JsonWriter& value(std::uint64_t v);
    JsonWriter& value(bool v);
    JsonWriter& field(const std::string& k, const std::string& v) { return key(k).value(v); }
    JsonWriter& field(const std::string& k, const char* v) { return key(k).value(v); }
    JsonWriter& field(const std::string& k, double v) { return key(k).value(v); }
    JsonWriter& field(const std::string& k, int v) { return key(k).value(v); }
    JsonWriter& field(const std::string& k, std::uint64_t v) { return key(k).value(v); }
    JsonWriter& field(const std::string& k, bool v) { return key(k).value(v); }

    std::string str() const { return out_; }

  private:
    void comma();
    std::string out_;
    std::vector<bool> first_stack_{};
    bool pending_key_ = false;
};

std::string json_escape(const std::string& s);

// FNV-1a 64-bit over the canonicalized spec text.
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

// key = value run configuration; '#' comments; strict schema.
struct RunConfig {
    std::map<std::string, std::string> kv;

    static RunConfig parse_file(const std::string& path,
                                const std::vector<std::string>& allowed_keys);
    static RunConfig parse_text(const std::string& text,
                                const std::vector<std::string>& allowed_keys);
    std::string canonical() const;  // sorted key=value lines
};

// serialization helpers used by the CLI
void residual_report_json(JsonWriter& w, const ResidualReport& rep);
void trace_csv(const FlowTrace& trace, const std::string& path);
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace kwlab

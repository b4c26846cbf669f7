#include "kwlab/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace kwlab {

void JsonWriter::comma() {
    if (!first_stack_.empty()) {
        if (!first_stack_.back() && !pending_key_) out_ += ",";
        first_stack_.back() = false;
    }
}

JsonWriter& JsonWriter::begin_object() {
    comma();
    pending_key_ = false;
    out_ += "{";
    first_stack_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    out_ += "}";
    first_stack_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::begin_array(const std::string& k) {
    if (!k.empty()) key(k);
    comma();
    pending_key_ = false;
    out_ += "[";
    first_stack_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    out_ += "]";
    first_stack_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::key(const std::string& k) {
    comma();
    out_ += "\"" + json_escape(k) + "\":";
    pending_key_ = true;
    return *this;
}

JsonWriter& JsonWriter::value(const std::string& v) {
    comma();
    pending_key_ = false;
    out_ += "\"" + json_escape(v) + "\"";
    return *this;
}

JsonWriter& JsonWriter::value(double v) {
    comma();
    pending_key_ = false;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out_ += buf;
    return *this;
}

JsonWriter& JsonWriter::value(int v) {
    comma();
    pending_key_ = false;
    out_ += std::to_string(v);
    return *this;
}

JsonWriter& JsonWriter::value(long long v) {
    comma();
    pending_key_ = false;
    out_ += std::to_string(v);
    return *this;
}

JsonWriter& JsonWriter::value(std::uint64_t v) {
    comma();
    pending_key_ = false;
    out_ += std::to_string(v);
    return *this;
}

JsonWriter& JsonWriter::value(bool v) {
    comma();
    pending_key_ = false;
    out_ += v ? "true" : "false";
    return *this;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if ((unsigned char)c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)v);
    return buf;
}

RunConfig RunConfig::parse_text(const std::string& text,
                                const std::vector<std::string>& allowed_keys) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        require(eq != std::string::npos,
                "config line " + std::to_string(lineno) + ": expected key = value");
        std::string k = trim(line.substr(0, eq));
        std::string v = trim(line.substr(eq + 1));
        require(!k.empty(), "config line " + std::to_string(lineno) + ": empty key");
        require(std::find(allowed_keys.begin(), allowed_keys.end(), k) !=
                    allowed_keys.end(),
                "config: unknown key '" + k + "' rejected");
        require(!cfg.kv.count(k), "config: duplicate key '" + k + "'");
        cfg.kv[k] = v;
    }
    return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path,
                                const std::vector<std::string>& allowed_keys) {
    std::ifstream in(path);
    if (!in) throw RuntimeError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), allowed_keys);
}

std::string RunConfig::canonical() const {
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

void residual_report_json(JsonWriter& w, const ResidualReport& rep) {
    w.begin_object();
    w.begin_array("blocks");
    for (const auto& b : rep.blocks) {
        w.begin_object();
        w.field("name", b.name);
        w.field("norm2", b.norm2);
        w.end_object();
    }
    w.end_array();
    w.field("total", rep.total);
    w.end_object();
}

void trace_csv(const FlowTrace& trace, const std::string& path) {
    std::string out = "iteration,residual,energy,step,millis\n";
    char buf[256];
    for (const auto& row : trace) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.6g\n", row.iter,
                      row.residual, row.energy, row.step, row.millis);
        out += buf;
    }
    write_text_atomic(path, out);
}

void write_text_atomic(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    FILE* fp = std::fopen(tmp.c_str(), "wb");
    if (!fp) throw RuntimeError("cannot open " + tmp + " for writing");
    std::size_t w = std::fwrite(content.data(), 1, content.size(), fp);
    std::fclose(fp);
    if (w != content.size()) throw RuntimeError("short write to " + tmp);
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw RuntimeError("cannot rename " + tmp + " to " + path);
}

}  // namespace kwlab

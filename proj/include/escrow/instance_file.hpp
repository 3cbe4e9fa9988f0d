#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "escrow/errors.hpp"
#include "escrow/natural.hpp"
#include "escrow/ssb.hpp"
#include "escrow/tsb.hpp"

namespace escrow {

inline constexpr const char* kInstanceSchemaVersion = "1";

enum class InstanceKind { ssb, tsb };

struct SsbSecret {
    Natural t, p, q;
    std::uint64_t k = 0;
};

struct TsbSecret {
    Natural t, p1, q1, p2, q2;
    std::uint64_t h = 0, k1 = 0, k2 = 0;
};

/// On-disk representation of a generated instance: declared parameters and
/// the public modulus(es), plus an optional secret section that can be
/// stripped so the public artifact ships alone.
struct InstanceFile {
    std::string schema_version = kInstanceSchemaVersion;
    InstanceKind kind = InstanceKind::ssb;

    // params (b_threshold only for tsb)
    std::size_t alpha = 0;
    std::size_t c = 0;
    std::uint64_t k_max = 0;
    std::optional<Natural> b_threshold;

    // public
    Natural n;        // ssb
    Natural n1, n2;   // tsb

    std::optional<SsbSecret> ssb_secret;
    std::optional<TsbSecret> tsb_secret;
};

namespace detail {

using json = nlohmann::json;

inline Natural parse_field(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj[key].is_string())
        throw parse_error(std::string("instance file: missing numeral \"") +
                          key + "\"");
    return parse_natural(obj[key].get<std::string>());
}

inline std::uint64_t parse_u64_field(const json& obj, const char* key) {
    const Natural v = parse_field(obj, key);
    if (!v.fits_ulong_p())
        throw parse_error(std::string("instance file: \"") + key +
                          "\" out of range");
    return mpz_get_ui(v.get_mpz_t());
}

inline void reject_unknown_keys(const json& obj,
                                std::initializer_list<const char*> allowed,
                                const char* where) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key)
                known = true;
        if (!known)
            throw parse_error(std::string("instance file: unexpected key \"") +
                              item.key() + "\" in " + where);
    }
}

} // namespace detail

inline std::string write_instance(const InstanceFile& file, bool include_secret,
                                  NumberFormat fmt = NumberFormat::dec) {
    using detail::json;
    json doc;
    doc["schema_version"] = file.schema_version;
    doc["kind"] = file.kind == InstanceKind::ssb ? "ssb" : "tsb";

    json params;
    params["alpha"] = file.alpha;
    params["c"] = file.c;
    params["k_max"] = file.k_max;
    if (file.kind == InstanceKind::tsb) {
        if (!file.b_threshold)
            throw domain_error("write_instance: tsb instance needs b_threshold");
        params["b_threshold"] = to_string(*file.b_threshold, fmt);
    }
    doc["params"] = params;

    json pub;
    if (file.kind == InstanceKind::ssb) {
        pub["n"] = to_string(file.n, fmt);
    } else {
        pub["n1"] = to_string(file.n1, fmt);
        pub["n2"] = to_string(file.n2, fmt);
    }
    doc["public"] = pub;

    if (include_secret) {
        json sec;
        if (file.kind == InstanceKind::ssb) {
            if (!file.ssb_secret)
                throw domain_error("write_instance: no secret section to write");
            sec["t"] = to_string(file.ssb_secret->t, fmt);
            sec["p"] = to_string(file.ssb_secret->p, fmt);
            sec["q"] = to_string(file.ssb_secret->q, fmt);
            sec["k"] = to_string(Natural(static_cast<unsigned long>(file.ssb_secret->k)), fmt);
        } else {
            if (!file.tsb_secret)
                throw domain_error("write_instance: no secret section to write");
            const auto& s = *file.tsb_secret;
            sec["t"] = to_string(s.t, fmt);
            sec["p1"] = to_string(s.p1, fmt);
            sec["q1"] = to_string(s.q1, fmt);
            sec["p2"] = to_string(s.p2, fmt);
            sec["q2"] = to_string(s.q2, fmt);
            sec["h"] = to_string(Natural(static_cast<unsigned long>(s.h)), fmt);
            sec["k1"] = to_string(Natural(static_cast<unsigned long>(s.k1)), fmt);
            sec["k2"] = to_string(Natural(static_cast<unsigned long>(s.k2)), fmt);
        }
        doc["secret"] = sec;
    }
    return doc.dump(2) + "\n";
}

inline InstanceFile read_instance(const std::string& text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw parse_error(std::string("instance file: invalid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw parse_error("instance file: top level must be an object");
    detail::reject_unknown_keys(doc, {"schema_version", "kind", "params", "public", "secret"},
                                "document");

    InstanceFile out;
    if (!doc.contains("schema_version") || !doc["schema_version"].is_string())
        throw parse_error("instance file: missing schema_version");
    out.schema_version = doc["schema_version"].get<std::string>();
    if (out.schema_version != kInstanceSchemaVersion)
        throw parse_error("instance file: unsupported schema_version \"" +
                          out.schema_version + "\"");

    if (!doc.contains("kind") || !doc["kind"].is_string())
        throw parse_error("instance file: missing kind");
    const std::string kind = doc["kind"].get<std::string>();
    if (kind == "ssb")
        out.kind = InstanceKind::ssb;
    else if (kind == "tsb")
        out.kind = InstanceKind::tsb;
    else
        throw parse_error("instance file: unknown kind \"" + kind + "\"");

    if (!doc.contains("params") || !doc["params"].is_object())
        throw parse_error("instance file: missing params");
    const json& params = doc["params"];
    const bool tsb = out.kind == InstanceKind::tsb;
    if (tsb)
        detail::reject_unknown_keys(params, {"alpha", "c", "k_max", "b_threshold"}, "params");
    else
        detail::reject_unknown_keys(params, {"alpha", "c", "k_max"}, "params");
    for (const char* key : {"alpha", "c", "k_max"})
        if (!params.contains(key) || !params[key].is_number_unsigned())
            throw parse_error(std::string("instance file: params.") + key +
                              " must be an unsigned integer");
    out.alpha = params["alpha"].get<std::size_t>();
    out.c = params["c"].get<std::size_t>();
    out.k_max = params["k_max"].get<std::uint64_t>();
    if (tsb)
        out.b_threshold = detail::parse_field(params, "b_threshold");

    if (!doc.contains("public") || !doc["public"].is_object())
        throw parse_error("instance file: missing public section");
    const json& pub = doc["public"];
    if (tsb) {
        detail::reject_unknown_keys(pub, {"n1", "n2"}, "public");
        out.n1 = detail::parse_field(pub, "n1");
        out.n2 = detail::parse_field(pub, "n2");
    } else {
        detail::reject_unknown_keys(pub, {"n"}, "public");
        out.n = detail::parse_field(pub, "n");
    }

    if (doc.contains("secret")) {
        const json& sec = doc["secret"];
        if (!sec.is_object())
            throw parse_error("instance file: secret must be an object");
        if (tsb) {
            detail::reject_unknown_keys(
                sec, {"t", "p1", "q1", "p2", "q2", "h", "k1", "k2"}, "secret");
            TsbSecret s;
            s.t = detail::parse_field(sec, "t");
            s.p1 = detail::parse_field(sec, "p1");
            s.q1 = detail::parse_field(sec, "q1");
            s.p2 = detail::parse_field(sec, "p2");
            s.q2 = detail::parse_field(sec, "q2");
            s.h = detail::parse_u64_field(sec, "h");
            s.k1 = detail::parse_u64_field(sec, "k1");
            s.k2 = detail::parse_u64_field(sec, "k2");
            out.tsb_secret = std::move(s);
        } else {
            detail::reject_unknown_keys(sec, {"t", "p", "q", "k"}, "secret");
            SsbSecret s;
            s.t = detail::parse_field(sec, "t");
            s.p = detail::parse_field(sec, "p");
            s.q = detail::parse_field(sec, "q");
            s.k = detail::parse_u64_field(sec, "k");
            out.ssb_secret = std::move(s);
        }
    }
    return out;
}

inline void save_instance(const std::string& path, const InstanceFile& file,
                          bool include_secret,
                          NumberFormat fmt = NumberFormat::dec) {
    std::ofstream out(path);
    if (!out)
        throw error("cannot open for writing: " + path);
    out << write_instance(file, include_secret, fmt);
    if (!out)
        throw error("write failed: " + path);
}

inline InstanceFile load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw parse_error("cannot open instance file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return read_instance(buf.str());
}

} // namespace escrow

#include "polyflow/instance_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "polyflow/errors.hpp"

namespace polyflow {

namespace {

std::vector<int> int_list(const Json& arr, const char* what) {
    if (!arr.is_array()) throw InputError(std::string("expected an array for ") + what);
    std::vector<int> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number_integer()) throw InputError(std::string("expected integers in ") + what);
        out.push_back(v.get<int>());
    }
    return out;
}

std::vector<double> double_list(const Json& arr, const char* what) {
    if (!arr.is_array()) throw InputError(std::string("expected an array for ") + what);
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) throw InputError(std::string("expected numbers in ") + what);
        out.push_back(v.get<double>());
    }
    return out;
}

const Json& field(const Json& doc, const char* name) {
    auto it = doc.find(name);
    if (it == doc.end()) throw InputError(std::string("missing field '") + name + "'");
    return *it;
}

}  // namespace

OraclePtr parse_oracle(const Json& spec) {
    if (!spec.is_object()) throw InputError("oracle spec must be an object");
    std::string kind = field(spec, "kind").get<std::string>();

    if (kind == "uniform") {
        int n = field(spec, "n").get<int>();
        int cap = field(spec, "capacity").get<int>();
        double scale = spec.value("scale", 1.0);
        return make_uniform_rank(n, cap, scale);
    }
    if (kind == "partition") {
        const Json& parts_json = field(spec, "parts");
        std::vector<std::vector<int>> parts;
        int n = 0;
        for (const auto& p : parts_json) {
            parts.push_back(int_list(p, "partition parts"));
            for (int e : parts.back()) n = std::max(n, e + 1);
        }
        if (spec.contains("n")) n = spec["n"].get<int>();
        std::vector<int> caps = int_list(field(spec, "capacities"), "capacities");
        return make_partition_rank(n, std::move(parts), std::move(caps));
    }
    if (kind == "graphic") {
        int nv = field(spec, "vertices").get<int>();
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : field(spec, "edges")) {
            auto pair = int_list(e, "edges");
            if (pair.size() != 2) throw InputError("graphic oracle: edges must be pairs");
            edges.emplace_back(pair[0], pair[1]);
        }
        return make_graphic_rank(nv, std::move(edges));
    }
    if (kind == "transversal") {
        int nr = field(spec, "right").get<int>();
        std::vector<std::vector<int>> adj;
        for (const auto& a : field(spec, "adjacency")) adj.push_back(int_list(a, "adjacency"));
        return make_transversal_rank(nr, std::move(adj));
    }
    if (kind == "laminar") {
        LaminarBudgetSpec lam;
        lam.n = field(spec, "n").get<int>();
        for (const auto& s : field(spec, "sets")) {
            LaminarBudgetSpec::Entry entry;
            entry.members = int_list(field(s, "members"), "laminar members");
            entry.budget = field(s, "budget").get<double>();
            lam.sets.push_back(std::move(entry));
        }
        return make_laminar_budget(lam);
    }
    if (kind == "coverage") {
        std::vector<double> weights = double_list(field(spec, "points"), "points");
        std::vector<std::vector<int>> covers;
        for (const auto& c : field(spec, "covers")) covers.push_back(int_list(c, "covers"));
        return make_coverage(std::move(weights), std::move(covers));
    }
    if (kind == "table") {
        int n = field(spec, "n").get<int>();
        const Json& values = field(spec, "values");
        std::vector<double> table(size_t{1} << n, 0.0);
        if (values.is_array()) {
            auto list = double_list(values, "table values");
            if (list.size() != table.size())
                throw InputError("table oracle: need 2^n values");
            table = std::move(list);
        } else {
            // Sparse map keyed by comma-separated member lists, e.g. "0,2".
            for (auto it = values.begin(); it != values.end(); ++it) {
                uint64_t mask = 0;
                std::stringstream ss(it.key());
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    if (tok.empty()) continue;
                    int e = std::stoi(tok);
                    if (e < 0 || e >= n) throw InputError("table oracle: member out of range");
                    mask |= 1ULL << e;
                }
                table[mask] = it->get<double>();
            }
        }
        return make_table(n, std::move(table));
    }
    if (kind == "scale") {
        return make_scaled(parse_oracle(field(spec, "base")),
                           field(spec, "factor").get<double>());
    }
    if (kind == "direct-sum") {
        std::vector<OraclePtr> children;
        for (const auto& c : field(spec, "parts")) children.push_back(parse_oracle(c));
        return make_direct_sum(std::move(children));
    }
    if (kind == "contract") {
        OraclePtr base = parse_oracle(field(spec, "base"));
        ElementSet t = ElementSet::from(base->ground_size(),
                                        int_list(field(spec, "set"), "contract set"));
        return make_contraction(std::move(base), std::move(t));
    }
    if (kind == "restrict") {
        OraclePtr base = parse_oracle(field(spec, "base"));
        ElementSet keep = ElementSet::from(base->ground_size(),
                                           int_list(field(spec, "set"), "restrict set"));
        return make_restriction(std::move(base), std::move(keep));
    }
    throw InputError("unknown oracle kind '" + kind + "'");
}

SapInstance parse_sap(const Json& doc) {
    SapInstance inst;
    inst.oracle = parse_oracle(field(doc, "oracle"));
    int n = field(doc, "ground").get<int>();
    if (n != inst.oracle->ground_size())
        throw InputError("instance: ground size does not match the oracle");
    inst.values = double_list(field(doc, "values"), "values");
    inst.costs = double_list(field(doc, "costs"), "costs");
    for (const auto& p : field(doc, "parts"))
        inst.parts.push_back(ElementSet::from(n, int_list(p, "parts")));
    inst.validate();
    return inst;
}

OswmInstance parse_oswm(const Json& doc) {
    OswmInstance inst;
    inst.items = field(doc, "items").get<int>();
    for (const auto& agent : field(doc, "agents")) {
        inst.matroids.push_back(parse_oracle(field(agent, "oracle")));
        inst.weights.push_back(agent.value("weight", 1.0));
    }
    inst.validate();
    return inst;
}

bool is_oswm_doc(const Json& doc) { return doc.contains("agents"); }

namespace {

void dump_value(const Json& v, std::string& out, int indent);

void append_indent(std::string& out, int indent) {
    out.append(static_cast<size_t>(indent), ' ');
}

void dump_number(const Json& v, std::string& out) {
    if (v.is_number_integer()) {
        char buf[32];
        snprintf(buf, sizeof buf, "%" PRId64, static_cast<int64_t>(v.get<int64_t>()));
        out += buf;
    } else {
        char buf[64];
        snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        out += buf;
    }
}

void dump_value(const Json& v, std::string& out, int indent) {
    switch (v.type()) {
        case Json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {  // nlohmann sorts keys
                if (!first) out += ",\n";
                first = false;
                append_indent(out, indent + 2);
                out += Json(it.key()).dump();
                out += ": ";
                dump_value(it.value(), out, indent + 2);
            }
            out += "\n";
            append_indent(out, indent);
            out += "}";
            return;
        }
        case Json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[";
            bool first = true;
            for (const auto& item : v) {
                if (!first) out += ", ";
                first = false;
                dump_value(item, out, indent);
            }
            out += "]";
            return;
        }
        case Json::value_t::number_integer:
        case Json::value_t::number_unsigned:
        case Json::value_t::number_float:
            dump_number(v, out);
            return;
        default:
            out += v.dump();
            return;
    }
}

}  // namespace

std::string canonical_dump(const Json& doc) {
    std::string out;
    dump_value(doc, out, 0);
    out += "\n";
    return out;
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    Json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw InputError("malformed JSON in " + path + ": " + e.what());
    }
    return doc;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path);
    out << content;
}

}  // namespace polyflow

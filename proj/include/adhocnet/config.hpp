#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adhocnet/bytes.hpp"

namespace adhocnet {

// Human-readable structured text shared by scenario files and node configs:
//
//   # full-line comment
//   key value until end of line
//   section [argument] {
//       nested-key value
//   }
//
// Keys may repeat (entries keep file order). Values are taken verbatim after
// the first whitespace run, so they may contain spaces; '#' only starts a
// comment at the beginning of a line.
struct ConfigNode {
    std::string name;  // section name, empty for the root
    std::string arg;   // optional section argument
    std::vector<std::pair<std::string, std::string>> entries;
    std::vector<ConfigNode> children;

    bool has(std::string_view key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return true;
        return false;
    }

    const std::string* get(std::string_view key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return &v;
        return nullptr;
    }

    std::string get_or(std::string_view key, std::string fallback) const {
        const std::string* v = get(key);
        return v ? *v : std::move(fallback);
    }

    std::uint64_t get_u64(std::string_view key) const {
        const std::string* v = get(key);
        if (!v) throw Error(Errc::scenario_invalid, "missing key: " + std::string(key));
        return parse_u64(*v, key);
    }

    std::uint64_t get_u64_or(std::string_view key, std::uint64_t fallback) const {
        const std::string* v = get(key);
        return v ? parse_u64(*v, key) : fallback;
    }

    double get_double_or(std::string_view key, double fallback) const {
        const std::string* v = get(key);
        if (!v) return fallback;
        try {
            std::size_t used = 0;
            double d = std::stod(*v, &used);
            if (used != v->size()) throw std::invalid_argument("trailing");
            return d;
        } catch (const std::exception&) {
            throw Error(Errc::scenario_invalid,
                        "not a number: " + std::string(key) + " = " + *v);
        }
    }

    bool get_bool_or(std::string_view key, bool fallback) const {
        const std::string* v = get(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        throw Error(Errc::scenario_invalid, "not a boolean: " + std::string(key) + " = " + *v);
    }

    const ConfigNode* child(std::string_view name) const {
        for (const auto& c : children)
            if (c.name == name) return &c;
        return nullptr;
    }

    std::vector<const ConfigNode*> children_named(std::string_view name) const {
        std::vector<const ConfigNode*> out;
        for (const auto& c : children)
            if (c.name == name) out.push_back(&c);
        return out;
    }

    static std::uint64_t parse_u64(const std::string& v, std::string_view key) {
        std::uint64_t out = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size())
            throw Error(Errc::scenario_invalid,
                        "not an unsigned integer: " + std::string(key) + " = " + v);
        return out;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

}  // namespace detail

inline ConfigNode parse_config(std::string_view text) {
    ConfigNode root;
    std::vector<ConfigNode*> stack{&root};
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                               : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;
        line = detail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (line == "}") {
            if (stack.size() == 1)
                throw Error(Errc::scenario_invalid,
                            "line " + std::to_string(line_no) + ": unmatched '}'");
            stack.pop_back();
            continue;
        }
        if (line.back() == '{') {
            std::string_view head = detail::trim(line.substr(0, line.size() - 1));
            if (head.empty())
                throw Error(Errc::scenario_invalid,
                            "line " + std::to_string(line_no) + ": section without a name");
            std::size_t sp = head.find_first_of(" \t");
            ConfigNode section;
            if (sp == std::string_view::npos) {
                section.name = std::string(head);
            } else {
                section.name = std::string(head.substr(0, sp));
                section.arg = std::string(detail::trim(head.substr(sp)));
            }
            stack.back()->children.push_back(std::move(section));
            stack.push_back(&stack.back()->children.back());
            continue;
        }
        std::size_t sp = line.find_first_of(" \t");
        if (sp == std::string_view::npos) {
            stack.back()->entries.emplace_back(std::string(line), std::string());
        } else {
            stack.back()->entries.emplace_back(std::string(line.substr(0, sp)),
                                               std::string(detail::trim(line.substr(sp))));
        }
    }
    if (stack.size() != 1) throw Error(Errc::scenario_invalid, "unterminated section at end of file");
    return root;
}

}  // namespace adhocnet

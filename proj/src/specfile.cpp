#include "pwarp/specfile.hpp"

#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

namespace pwarp {

namespace {

struct Line {
    int number = 0;
    std::string section;
    std::string key;
    std::string value;
    bool quoted = false;
};

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
    throw Error(ErrorKind::Load, path + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// Strips a trailing comment, honoring double quotes.
std::string strip_comment(const std::string& s) {
    bool in_quote = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_quote = !in_quote;
        if (s[i] == '#' && !in_quote) return s.substr(0, i);
    }
    return s;
}

std::vector<Line> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Load, "cannot open file '" + path + "'");
    std::vector<Line> out;
    std::string raw;
    std::string section;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        std::string s = trim(strip_comment(raw));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(path, number, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail(path, number, "expected 'key = value'");
        Line ln;
        ln.number = number;
        ln.section = section;
        ln.key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (!val.empty() && val.front() == '"') {
            if (val.size() < 2 || val.back() != '"')
                fail(path, number, "unterminated quoted value");
            val = val.substr(1, val.size() - 2);
            ln.quoted = true;
        }
        ln.value = val;
        if (ln.key.empty()) fail(path, number, "empty key");
        out.push_back(std::move(ln));
    }
    return out;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

double parse_number(const std::string& path, int line, const std::string& s) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) fail(path, line, "malformed number '" + s + "'");
        return v;
    } catch (const std::exception&) {
        fail(path, line, "malformed number '" + s + "'");
    }
}

int parse_int(const std::string& path, int line, const std::string& s) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        fail(path, line, "malformed integer '" + s + "'");
    return v;
}

} // namespace

ManifoldSpec load_manifold_file(const std::string& path) {
    auto lines = read_lines(path);

    std::string name = "unnamed";
    std::optional<int> dim, index;
    std::vector<std::string> coords;
    std::vector<Interval> box;
    std::vector<Line> cometric_lines, bivector_lines, param_lines;

    for (const auto& ln : lines) {
        if (ln.section == "manifold") {
            if (ln.key == "name") name = ln.value;
            else if (ln.key == "dim") dim = parse_int(path, ln.number, ln.value);
            else if (ln.key == "index") index = parse_int(path, ln.number, ln.value);
            else if (ln.key == "coords") coords = split_commas(ln.value);
            else if (ln.key == "box") {
                for (const auto& item : split_commas(ln.value)) {
                    std::size_t colon = item.find(':');
                    if (colon == std::string::npos)
                        fail(path, ln.number, "box entries must be 'lo:hi'");
                    box.emplace_back(parse_number(path, ln.number, trim(item.substr(0, colon))),
                                     parse_number(path, ln.number, trim(item.substr(colon + 1))));
                }
            } else
                fail(path, ln.number, "unknown key '" + ln.key + "' in [manifold]");
        } else if (ln.section == "cometric") {
            cometric_lines.push_back(ln);
        } else if (ln.section == "bivector") {
            bivector_lines.push_back(ln);
        } else if (ln.section == "params") {
            param_lines.push_back(ln);
        } else {
            fail(path, ln.number, "unknown section [" + ln.section + "]");
        }
    }

    if (!dim) throw Error(ErrorKind::Load, path + ": missing dim");
    if (!index) throw Error(ErrorKind::Load, path + ": missing index");
    if (coords.empty()) throw Error(ErrorKind::Load, path + ": missing coords");

    ManifoldSpec::Builder b(name, *dim, *index, coords);
    if (!box.empty()) b.box(box);
    for (const auto& ln : param_lines) b.param(ln.key, parse_number(path, ln.number, ln.value));

    auto entry_indices = [&](const Line& ln, char prefix) {
        if (ln.key.size() != 3 || ln.key[0] != prefix || !std::isdigit(ln.key[1]) ||
            !std::isdigit(ln.key[2]))
            fail(path, ln.number,
                 std::string("expected keys like '") + prefix + "12', got '" + ln.key + "'");
        int i = ln.key[1] - '0', j = ln.key[2] - '0';
        if (i < 1 || j < 1 || i > *dim || j > *dim)
            fail(path, ln.number, "entry '" + ln.key + "' out of range for dim");
        return std::pair<int, int>{i - 1, j - 1};
    };

    for (const auto& ln : cometric_lines) {
        auto [i, j] = entry_indices(ln, 'g');
        if (i > j) fail(path, ln.number, "cometric entries must have i <= j ('" + ln.key + "')");
        try {
            b.cometric(i, j, ln.value);
        } catch (const Error& e) {
            fail(path, ln.number, e.what());
        }
    }
    for (const auto& ln : bivector_lines) {
        auto [i, j] = entry_indices(ln, 'p');
        if (i >= j)
            fail(path, ln.number,
                 "bivector entries must have i < j; lower-triangle entry '" + ln.key +
                     "' is not accepted");
        try {
            b.bivector(i, j, ln.value);
        } catch (const Error& e) {
            fail(path, ln.number, e.what());
        }
    }

    try {
        return b.build();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Load || e.kind() == ErrorKind::Syntax ||
            e.kind() == ErrorKind::UnknownIdentifier)
            throw Error(e.kind(), path + ": " + e.what(), e.offset());
        throw;
    }
}

WarpedSpec load_warped_file(const std::string& path) {
    auto lines = read_lines(path);
    std::string base_path, fiber_path, f_src, nu_src = "1";
    for (const auto& ln : lines) {
        if (ln.section != "warped")
            fail(path, ln.number, "warped files contain a single [warped] section");
        if (ln.key == "base") base_path = ln.value;
        else if (ln.key == "fiber") fiber_path = ln.value;
        else if (ln.key == "f") f_src = ln.value;
        else if (ln.key == "nu") nu_src = ln.value;
        else fail(path, ln.number, "unknown key '" + ln.key + "' in [warped]");
    }
    if (base_path.empty()) throw Error(ErrorKind::Load, path + ": missing base");
    if (fiber_path.empty()) throw Error(ErrorKind::Load, path + ": missing fiber");
    if (f_src.empty()) throw Error(ErrorKind::Load, path + ": missing f");

    std::filesystem::path dir = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        if (fp.is_relative()) fp = dir / fp;
        return fp.string();
    };

    ManifoldSpec base = load_manifold_file(resolve(base_path));
    ManifoldSpec fiber = load_manifold_file(resolve(fiber_path));
    return WarpedSpec::make(std::move(base), std::move(fiber), f_src, nu_src);
}

} // namespace pwarp

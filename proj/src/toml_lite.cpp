#include "driftbench/toml_lite.hpp"

#include "driftbench/sparse.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace driftbench::toml_lite {

namespace {

struct Cursor {
    const std::string& text;
    std::string origin;
    size_t pos = 0;
    int line = 1;

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }
    char take() {
        char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
    }

    // spaces and comments; newlines too when `through_newlines`
    void skip(bool through_newlines) {
        while (!eof()) {
            char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') take();
            } else if (c == ' ' || c == '\t' || c == '\r') {
                take();
            } else if (c == '\n' && through_newlines) {
                take();
            } else {
                break;
            }
        }
    }
};

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_basic_string(Cursor& c) {
    c.take(); // opening quote
    std::string out;
    while (!c.eof()) {
        char ch = c.take();
        if (ch == '"') return out;
        if (ch == '\n') c.fail("unterminated string");
        if (ch == '\\') {
            if (c.eof()) c.fail("unterminated escape");
            char esc = c.take();
            switch (esc) {
            case '"': out += '"'; break;
            case '\\': out += '\\'; break;
            case 'n': out += '\n'; break;
            case 't': out += '\t'; break;
            default: c.fail(std::string("unsupported escape \\") + esc);
            }
        } else {
            out += ch;
        }
    }
    c.fail("unterminated string");
}

std::string parse_key_part(Cursor& c) {
    if (!c.eof() && c.peek() == '"') return parse_basic_string(c);
    std::string out;
    while (!c.eof() && is_bare_key_char(c.peek())) out += c.take();
    if (out.empty()) c.fail("expected key");
    return out;
}

std::vector<std::string> parse_dotted_key(Cursor& c) {
    std::vector<std::string> parts;
    parts.push_back(parse_key_part(c));
    c.skip(false);
    while (!c.eof() && c.peek() == '.') {
        c.take();
        c.skip(false);
        parts.push_back(parse_key_part(c));
        c.skip(false);
    }
    return parts;
}

nlohmann::json parse_value(Cursor& c);

nlohmann::json parse_array(Cursor& c) {
    c.take(); // '['
    nlohmann::json arr = nlohmann::json::array();
    for (;;) {
        c.skip(true);
        if (c.eof()) c.fail("unterminated array");
        if (c.peek() == ']') {
            c.take();
            return arr;
        }
        arr.push_back(parse_value(c));
        c.skip(true);
        if (c.eof()) c.fail("unterminated array");
        if (c.peek() == ',') {
            c.take();
        } else if (c.peek() != ']') {
            c.fail("expected ',' or ']' in array");
        }
    }
}

nlohmann::json parse_value(Cursor& c) {
    c.skip(false);
    if (c.eof()) c.fail("expected value");
    char ch = c.peek();
    if (ch == '"') return parse_basic_string(c);
    if (ch == '[') return parse_array(c);
    if (ch == '{') c.fail("inline tables are not supported");

    std::string tok;
    while (!c.eof()) {
        char t = c.peek();
        if (t == ',' || t == ']' || t == '#' || t == '\n' || t == ' ' || t == '\t' || t == '\r')
            break;
        tok += c.take();
    }
    if (tok == "true") return true;
    if (tok == "false") return false;
    if (tok.empty()) c.fail("expected value");

    // integer first, then float
    {
        int64_t v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec == std::errc{} && p == tok.data() + tok.size()) return v;
    }
    {
        double v = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec == std::errc{} && p == tok.data() + tok.size()) return v;
    }
    c.fail("cannot parse value '" + tok + "'");
}

nlohmann::json* descend(nlohmann::json* node, const std::vector<std::string>& path, Cursor& c,
                        size_t upto) {
    for (size_t i = 0; i < upto; ++i) {
        nlohmann::json& cur = *node;
        if (!cur.is_object()) c.fail("path collides with a non-table value");
        nlohmann::json& child = cur[path[i]];
        if (child.is_null()) child = nlohmann::json::object();
        if (child.is_array()) {
            if (child.empty()) c.fail("cannot descend into empty table array");
            node = &child.back();
        } else {
            node = &child;
        }
    }
    return node;
}

} // namespace

nlohmann::json parse(const std::string& text, const std::string& origin) {
    nlohmann::json root = nlohmann::json::object();
    Cursor c{text, origin};
    nlohmann::json* current = &root;

    for (;;) {
        c.skip(true);
        if (c.eof()) break;

        if (c.peek() == '[') {
            c.take();
            bool table_array = !c.eof() && c.peek() == '[';
            if (table_array) c.take();
            c.skip(false);
            std::vector<std::string> path = parse_dotted_key(c);
            c.skip(false);
            if (c.eof() || c.take() != ']') c.fail("expected ']' after table name");
            if (table_array && (c.eof() || c.take() != ']')) c.fail("expected ']]' after table array");

            nlohmann::json* parent = descend(&root, path, c, path.size() - 1);
            nlohmann::json& slot = (*parent)[path.back()];
            if (table_array) {
                if (slot.is_null()) slot = nlohmann::json::array();
                if (!slot.is_array()) c.fail("table array collides with existing value");
                slot.push_back(nlohmann::json::object());
                current = &slot.back();
            } else {
                if (slot.is_null()) slot = nlohmann::json::object();
                if (!slot.is_object()) c.fail("table collides with existing value");
                current = &slot;
            }
            continue;
        }

        std::vector<std::string> key = parse_dotted_key(c);
        c.skip(false);
        if (c.eof() || c.take() != '=') c.fail("expected '=' after key");
        nlohmann::json value = parse_value(c);
        c.skip(false);
        if (!c.eof() && c.peek() != '\n') c.fail("unexpected trailing content");

        nlohmann::json* parent = descend(current, key, c, key.size() - 1);
        if (parent->contains(key.back())) c.fail("duplicate key '" + key.back() + "'");
        (*parent)[key.back()] = std::move(value);
    }
    return root;
}

nlohmann::json load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("missing config file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (path.extension() == ".toml") return parse(buf.str(), path.filename().string());
    try {
        return nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("malformed JSON config " + path.string() + ": " + e.what());
    }
}

} // namespace driftbench::toml_lite

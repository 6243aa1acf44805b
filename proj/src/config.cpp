#include "rmhedge/config.hpp"

#include <cctype>
#include <vector>

namespace rmhedge {

namespace {

class TomlReader {
public:
    explicit TomlReader(std::string text) : src_(std::move(text)) {}

    nlohmann::json parse() {
        nlohmann::json root = nlohmann::json::object();
        nlohmann::json* table = &root;
        while (true) {
            skip_ws_lines();
            if (eof()) break;
            if (peek() == '[') {
                ++pos_;
                if (peek() == '[') fail("arrays of tables are not supported");
                auto path = key_path(']');
                expect(']');
                table = &root;
                for (const auto& k : path) {
                    auto& slot = (*table)[k];
                    if (slot.is_null()) slot = nlohmann::json::object();
                    if (!slot.is_object()) fail("'" + k + "' is not a table");
                    table = &slot;
                }
                end_line();
                continue;
            }
            auto path = key_path('=');
            expect('=');
            key_ = join(path);
            nlohmann::json val = value();
            nlohmann::json* t = table;
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                auto& slot = (*t)[path[i]];
                if (slot.is_null()) slot = nlohmann::json::object();
                if (!slot.is_object()) fail("'" + path[i] + "' is not a table");
                t = &slot;
            }
            if (t->contains(path.back())) fail("duplicate key");
            (*t)[path.back()] = std::move(val);
            end_line();
        }
        return root;
    }

private:
    bool eof() const { return pos_ >= src_.size(); }
    char peek() const { return eof() ? '\0' : src_[pos_]; }

    [[noreturn]] void fail(const std::string& msg) const {
        int line = 1;
        for (std::size_t i = 0; i < pos_ && i < src_.size(); ++i)
            if (src_[i] == '\n') ++line;
        std::string where = "line " + std::to_string(line);
        if (!key_.empty()) where += ", key '" + key_ + "'";
        throw ConfigError(where + ": " + msg);
    }

    void skip_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }
    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n') ++pos_;
    }
    void skip_ws_lines() {
        while (!eof()) {
            skip_ws();
            skip_comment();
            if (peek() == '\n' || peek() == '\r') {
                ++pos_;
                continue;
            }
            break;
        }
    }
    void end_line() {
        skip_ws();
        skip_comment();
        if (!eof() && peek() != '\n' && peek() != '\r') fail("unexpected text after value");
        key_.clear();
    }
    void expect(char c) {
        skip_ws();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string bare_or_quoted_key() {
        skip_ws();
        if (peek() == '"') return basic_string();
        std::string k;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
            k += src_[pos_++];
        if (k.empty()) fail("expected a key");
        return k;
    }
    std::vector<std::string> key_path(char stop) {
        std::vector<std::string> path{bare_or_quoted_key()};
        skip_ws();
        while (peek() == '.') {
            ++pos_;
            path.push_back(bare_or_quoted_key());
            skip_ws();
        }
        if (peek() != stop) fail(std::string("expected '") + stop + "'");
        return path;
    }
    static std::string join(const std::vector<std::string>& p) {
        std::string s;
        for (const auto& k : p) s += (s.empty() ? "" : ".") + k;
        return s;
    }

    std::string basic_string() {
        ++pos_;  // opening quote
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            char c = src_[pos_++];
            if (c == '"') break;
            if (c == '\\') {
                char e = src_[pos_++];
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out += c;
            }
        }
        return out;
    }

    void skip_array_ws() {
        while (!eof()) {
            skip_ws();
            skip_comment();
            if (peek() == '\n' || peek() == '\r') {
                ++pos_;
                continue;
            }
            break;
        }
    }

    nlohmann::json value() {
        skip_ws();
        char c = peek();
        if (c == '"') return basic_string();
        if (c == '[') {
            ++pos_;
            nlohmann::json arr = nlohmann::json::array();
            skip_array_ws();
            while (peek() != ']') {
                arr.push_back(value());
                skip_array_ws();
                if (peek() == ',') {
                    ++pos_;
                    skip_array_ws();
                } else if (peek() != ']') {
                    fail("expected ',' or ']' in array");
                }
            }
            ++pos_;
            return arr;
        }
        if (c == '{') {
            ++pos_;
            nlohmann::json obj = nlohmann::json::object();
            skip_ws();
            while (peek() != '}') {
                auto path = key_path('=');
                expect('=');
                nlohmann::json* t = &obj;
                for (std::size_t i = 0; i + 1 < path.size(); ++i) t = &(*t)[path[i]];
                (*t)[path.back()] = value();
                skip_ws();
                if (peek() == ',') {
                    ++pos_;
                    skip_ws();
                } else if (peek() != '}') {
                    fail("expected ',' or '}' in inline table");
                }
            }
            ++pos_;
            return obj;
        }
        std::string tok;
        while (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != ',' && peek() != ']' &&
               peek() != '}' && peek() != '#')
            tok += src_[pos_++];
        if (tok == "true") return true;
        if (tok == "false") return false;
        if (tok.empty()) fail("missing value");
        std::string clean;
        for (char ch : tok)
            if (ch != '_') clean += ch;
        try {
            std::size_t used = 0;
            bool isFloat = clean.find_first_of(".eE") != std::string::npos || clean == "inf" || clean == "nan";
            if (!isFloat) {
                long long v = std::stoll(clean, &used);
                if (used == clean.size()) return v;
            } else {
                double v = std::stod(clean, &used);
                if (used == clean.size()) return v;
            }
        } catch (const std::exception&) {
        }
        fail("cannot parse value '" + tok + "'");
    }

    std::string src_;
    std::size_t pos_ = 0;
    std::string key_;
};

}  // namespace

nlohmann::json parse_toml(const std::string& text) { return TomlReader(text).parse(); }

nlohmann::json load_config_file(const std::string& path) {
    std::string text = read_text(path);
    const bool isJson = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    if (isJson) {
        try {
            return nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(path + ": " + e.what());
        }
    }
    try {
        return parse_toml(text);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace rmhedge

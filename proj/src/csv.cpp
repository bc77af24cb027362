#include "netleak/csv.hpp"

namespace netleak::csv {

std::optional<std::vector<std::string>> Reader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++current_line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        record_line_ = current_line_;

        std::vector<std::string> fields;
        std::string field;
        bool quoted = false;
        std::size_t i = 0;
        for (;;) {
            if (i >= line.size()) {
                if (quoted) {
                    // quoted field continues onto the next physical line
                    std::string cont;
                    if (!std::getline(in_, cont)) break;  // unterminated quote: take as-is
                    ++current_line_;
                    if (!cont.empty() && cont.back() == '\r') cont.pop_back();
                    field.push_back('\n');
                    line = std::move(cont);
                    i = 0;
                    continue;
                }
                break;
            }
            char c = line[i];
            if (quoted) {
                if (c == '"') {
                    if (i + 1 < line.size() && line[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                    } else {
                        quoted = false;
                        ++i;
                    }
                } else {
                    field.push_back(c);
                    ++i;
                }
            } else if (c == '"' && field.empty()) {
                quoted = true;
                ++i;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
                ++i;
            } else {
                field.push_back(c);
                ++i;
            }
        }
        fields.push_back(std::move(field));
        return fields;
    }
    return std::nullopt;
}

std::string escape_field(const std::string& field) {
    bool needs_quote = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            needs_quote = true;
            break;
        }
    }
    if (!needs_quote) return field;
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join_row(std::span<const std::string> fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += escape_field(fields[i]);
    }
    out.push_back('\n');
    return out;
}

}  // namespace netleak::csv

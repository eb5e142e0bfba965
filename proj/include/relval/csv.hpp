#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "relval/error.hpp"

namespace relval::csv {

// RFC 4180 reader. Fields may be quoted; quoted fields may contain commas,
// doubled quotes and newlines. Accepts both \n and \r\n line endings.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline Table parse(std::string_view text) {
    Table out;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    bool record_started = false;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        if (out.header.empty())
            out.header = std::move(record);
        else
            out.rows.push_back(std::move(record));
        record.clear();
        record_started = false;
    };

    for (size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (field_started && !field.empty())
                throw BadValueError("stray quote inside unquoted CSV field");
            in_quotes = true;
            field_started = true;
            record_started = true;
            break;
        case ',':
            end_field();
            record_started = true;
            break;
        case '\r':
            break;
        case '\n':
            if (record_started || field_started || !record.empty()) end_record();
            break;
        default:
            field += c;
            field_started = true;
            record_started = true;
            break;
        }
    }
    if (in_quotes) throw BadValueError("unterminated quoted CSV field");
    if (record_started || field_started || !record.empty()) end_record();
    return out;
}

inline std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string write_row(const std::vector<std::string>& fields) {
    std::string out;
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += quote(fields[i]);
    }
    out += '\n';
    return out;
}

} // namespace relval::csv

#pragma once

#include <string>
#include <vector>

namespace mixqa {

/// RFC-4180-style CSV records: quoted fields, doubled quotes, newlines
/// inside quotes, CRLF or LF line endings.
inline std::vector<std::vector<std::string>> parse_csv_text(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any = false;

    auto end_field = [&] {
        record.push_back(field);
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
        any = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"': quoted = true; any = true; break;
            case ',': end_field(); any = true; break;
            case '\r': break;
            case '\n':
                if (any || !field.empty() || !record.empty()) end_record();
                break;
            default: field += c; any = true; break;
        }
    }
    if (any || !field.empty() || !record.empty()) end_record();
    return records;
}

} // namespace mixqa

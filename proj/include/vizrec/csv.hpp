/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vizrec {

// One parsed CSV record. Empty fields are kept as empty strings.
using CsvRow = std::vector<std::string>;

// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line endings.
// Throws CsvError on an unterminated quoted field.
std::vector<CsvRow> parse_csv(std::string_view text);

// Quotes a field only when it contains a separator, quote or line break.
std::string csv_escape(std::string_view field);

}  // namespace vizrec

/* Copyright 2026 The MSnet Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef MSNET_UTF8_HPP_
#define MSNET_UTF8_HPP_

#include <string>
#include <string_view>

// Character offsets throughout the project count Unicode scalar values.
namespace msnet::utf8 {

// Throws ValidationError on malformed UTF-8.
std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view chars);
std::size_t length(std::string_view bytes);

}  // namespace msnet::utf8

#endif  // MSNET_UTF8_HPP_

#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace dygrag {

struct TokenSpan {
    std::size_t begin = 0;  // byte offsets
    std::size_t end = 0;
};

/// Pluggable token counter shared by chunking and context budgeting.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<TokenSpan> spans(std::string_view text) const = 0;
    virtual std::size_t count(std::string_view text) const { return spans(text).size(); }
};

/// One token per whitespace-separated word.
class WhitespaceTokenizer final : public Tokenizer {
public:
    std::vector<TokenSpan> spans(std::string_view text) const override;
    std::size_t count(std::string_view text) const override;
};

const Tokenizer& default_tokenizer();

}  // namespace dygrag

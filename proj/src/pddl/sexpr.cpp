#include "sexpr.hpp"

#include "induct/pddl.hpp"

#include <cctype>

namespace induct::pddl::detail {

namespace {

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

    SExpr read() {
        skip_space();
        if (pos_ >= text_.size()) {
            throw ParseError("unexpected end of input", line_, column_);
        }
        SExpr expr;
        expr.line = line_;
        expr.column = column_;
        char c = text_[pos_];
        if (c == ')') {
            throw ParseError("unexpected ')'", line_, column_);
        }
        if (c == '(') {
            advance();
            while (true) {
                skip_space();
                if (pos_ >= text_.size()) {
                    throw ParseError("unmatched '('", expr.line, expr.column);
                }
                if (text_[pos_] == ')') {
                    advance();
                    break;
                }
                expr.items.push_back(read());
            }
            return expr;
        }
        expr.is_atom = true;
        while (pos_ < text_.size()) {
            c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ';') {
                break;
            }
            expr.atom.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
            advance();
        }
        return expr;
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        ++pos_;
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
};

}  // namespace

SExpr read_sexpr(std::string_view text) {
    Reader reader(text);
    SExpr expr = reader.read();
    if (!reader.at_end()) {
        SExpr extra = reader.read();
        throw ParseError("trailing content after expression", extra.line, extra.column);
    }
    return expr;
}

std::vector<SExpr> read_all(std::string_view text) {
    Reader reader(text);
    std::vector<SExpr> out;
    while (!reader.at_end()) out.push_back(reader.read());
    return out;
}

void fail(const SExpr& at, const std::string& message) {
    throw ParseError(message, at.line, at.column);
}

}  // namespace induct::pddl::detail

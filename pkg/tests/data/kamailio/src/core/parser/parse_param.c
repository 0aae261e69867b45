/*
 * Generic parameter list parser (;name=value;name="value").
 */

#include "../str.h"
#include "../ut.h"
#include "parse_param.h"

#define MAX_PARAMS 128

static param_t pool[MAX_PARAMS];
static int pool_used;

static param_t* new_param(void)
{
	if (pool_used >= MAX_PARAMS) {
		return 0;
	}
	return &pool[pool_used++];
}

static inline void trim_leading2(str* _s)
{
	for (; _s->len > 0; _s->s++, _s->len--) {
		if ((*_s->s != ' ') && (*_s->s != '\t')) {
			return;
		}
	}
}

static inline void parse_quoted_param(str* _s, str* _r)
{
	char* end_quote;

	/* skip the opening quote */
	_s->s++;
	_s->len--;

	end_quote = q_memchr(_s->s, '"', _s->len);
	if (end_quote == 0) {
		_r->s = _s->s;
		_r->len = _s->len;
		_s->len = 0;
		return;
	}

	_r->s = _s->s;
	_r->len = end_quote - _s->s;
	_s->len -= _r->len + 1;
	_s->s = end_quote + 1;
}

static inline int parse_param_body(param_item_t* p, str* _s,
		char separator, pclass_t _c)
{
	if (_s->len == 0) {
		return 0;
	}

	if (_s->s[0] == '"') {
		parse_quoted_param(_s, &p->body);
	} else {
		p->body.s = _s->s;
		p->body.len = _s->len;
	}

	p->type = (int)_c;
	if (separator == ';') {
		p->next = 0;
	}

	return 0;
}

static inline int parse_param2(str* _s, pclass_t _c, param_t* _p,
		char separator)
{
	trim_leading2(_s);
	if (_s->len == 0) {
		return -1;
	}

	_p->name.s = _s->s;
	_p->name.len = 0;
	if (parse_param_body(_p, _s, separator, _c) < 0) {
		return -2;
	}

	return 0;
}

static inline int parse_params2(str* _s, pclass_t _c, param_t** _p,
		char separator)
{
	param_t* p;

	while (_s->len > 0) {
		p = new_param();
		if (p == 0) {
			return -1;
		}

		if (parse_param2(_s, _c, p, separator) < 0) {
			return -2;
		}

		p->next = *_p;
		*_p = p;

		if (_s->len > 0) {
			_s->s++;
			_s->len--;
		}
	}

	return 0;
}

int parse_params(str* _s, pclass_t _c, param_t** _p)
{
	if (_p == 0) {
		return -1;
	}

	return parse_params2(_s, _c, _p, ';');
}

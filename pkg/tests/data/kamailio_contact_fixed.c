/*
 * Contact header field body parser.
 */

#include "../../str.h"
#include "contact.h"

static contact_t slots[MAX_CONTACTS];
static int slots_used;

contact_t* new_contact(void)
{
	if (slots_used >= MAX_CONTACTS) {
		return 0;
	}
	return &slots[slots_used++];
}

void free_contact(contact_t** _c)
{
	*_c = 0;
}

static inline void trim_leading(str* _s)
{
	for (; _s->len > 0; _s->s++, _s->len--) {
		if ((*_s->s != ' ') && (*_s->s != '\t')) {
			return;
		}
	}
}

/*
 * Skip the display name part of a contact, leaving _s at the URI.
 */
static inline int skip_name(str* _s)
{
	char* p;
	char* last_wsp;

	if (!_s) {
		return -1;
	}

	p = _s->s;
	last_wsp = 0;

	while (p < _s->s + _s->len) {
		if ((*p == ' ') || (*p == '\t')) {
			last_wsp = p;
		} else {
			if (*p == '<') {
				_s->len -= p - _s->s;
				_s->s = p;
				return 0;
			}

			if ((*p == ':') || (*p == ';')) {
				if (last_wsp) {
					_s->len -= last_wsp - _s->s + 1;
					_s->s = last_wsp;
				}
				return 0;
			}
		}
		p++;
	}

	return 0;
}

int parse_contacts(str* _s, contact_t** _c)
{
	contact_t* c;
	param_t* params;

	while (1) {
		c = new_contact();
		if (c == 0) {
			return -1;
		}

		trim_leading(_s);
		if (skip_name(_s) < 0) {
			free_contact(&c);
			return -2;
		}

		c->uri.s = _s->s;
		c->uri.len = _s->len;

		params = 0;
		if (parse_params(_s, CLASS_CONTACT, &params) < 0) {
			free_contact(&c);
			return -3;
		}

		c->params = params;
		c->next = *_c;
		*_c = c;

		if (_s->len == 0) {
			return 0;
		}
	}

	return 0;
}

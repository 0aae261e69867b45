#ifndef parse_param_h
#define parse_param_h

#include "../str.h"

enum pclass {
	CLASS_ANY = 0,
	CLASS_CONTACT,
	CLASS_URI,
	CLASS_EVENT_DIALOG
};

typedef enum pclass pclass_t;

struct param {
	str name;
	str body;
	int type;
	struct param* next;
};

typedef struct param param_t;
typedef param_t param_item_t;

int parse_params(str* _s, pclass_t _c, param_t** _p);

#endif

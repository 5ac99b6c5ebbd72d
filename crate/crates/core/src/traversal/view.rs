use serde::Serialize;

use super::Session;
use crate::error::Result;
use crate::store::{ObjectId, Store};
use crate::value::Value;

/// One rendering of the five-dimensional space around a focused object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViewModel {
    pub focus: Option<FocusEntry>,
    /// Classes with the number of objects passing filters and anchors.
    #[serde(rename = "d1")]
    pub d1_classes: Vec<ClassCount>,
    /// Objects of the selected class.
    #[serde(rename = "d2")]
    pub d2_objects: Vec<ObjectEntry>,
    /// Every attribute of the focus, unfiltered.
    #[serde(rename = "d3")]
    pub d3_attributes: Vec<AttributeEntry>,
    /// Dependent objects grouped by (class, linking attribute).
    #[serde(rename = "d4")]
    pub d4_context: Vec<ContextGroup>,
    /// Scalar values of each d4 member, one table per group.
    #[serde(rename = "d5")]
    pub d5_group_attributes: Vec<GroupAttributes>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FocusEntry {
    pub id: ObjectId,
    pub class: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassCount {
    pub class: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObjectEntry {
    pub id: ObjectId,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkTarget {
    pub target_id: ObjectId,
    pub target_class: String,
    pub target_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributeEntry {
    pub attribute: String,
    /// Rendered value; the target's label for links. `None` when unpopulated.
    pub value: Option<String>,
    pub is_link: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<LinkTarget>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContextGroup {
    pub class: String,
    pub via_attribute: String,
    pub members: Vec<ObjectEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroupAttributes {
    pub class: String,
    pub via_attribute: String,
    pub columns: Vec<String>,
    pub rows: Vec<MemberValues>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberValues {
    pub id: ObjectId,
    pub values: Vec<Option<String>>,
}

impl ViewModel {
    /// Every object id appearing in any dimension.
    pub fn object_ids(&self) -> Vec<ObjectId> {
        let mut ids: Vec<ObjectId> = self.focus.iter().map(|f| f.id).collect();
        ids.extend(self.d2_objects.iter().map(|o| o.id));
        ids.extend(self.d3_attributes.iter().filter_map(|a| a.target.as_ref().map(|t| t.target_id)));
        ids.extend(self.d4_context.iter().flat_map(|g| g.members.iter().map(|m| m.id)));
        ids.extend(self.d5_group_attributes.iter().flat_map(|g| g.rows.iter().map(|r| r.id)));
        ids
    }

    /// The d4 group (class, attribute) containing `member`, if displayed.
    pub fn group_of(&self, member: ObjectId) -> Option<&ContextGroup> {
        self.d4_context
            .iter()
            .find(|g| g.members.iter().any(|m| m.id == member))
    }
}

pub(super) fn build(store: &Store, session: &Session) -> Result<ViewModel> {
    let vocab = store.vocabulary();
    let d1_classes = vocab
        .classes
        .iter()
        .map(|c| ClassCount {
            class: c.name.clone(),
            count: session.visible_objects(store, &c.name).len(),
        })
        .collect();

    let entry = |id: ObjectId| ObjectEntry { id, label: store.label(id) };
    let d2_objects = match &session.selected_class {
        Some(class) if vocab.class(class).is_some() => {
            session.visible_objects(store, class).into_iter().map(entry).collect()
        }
        _ => Vec::new(),
    };

    let mut view = ViewModel {
        focus: None,
        d1_classes,
        d2_objects,
        d3_attributes: Vec::new(),
        d4_context: Vec::new(),
        d5_group_attributes: Vec::new(),
    };
    let Some(focus) = session.focus else {
        return Ok(view);
    };

    let record = store.require(focus)?;
    let class = vocab.require_class(&record.class)?;
    view.focus = Some(FocusEntry {
        id: focus,
        class: class.name.clone(),
        label: store.label(focus),
    });
    view.d3_attributes = class
        .attributes
        .iter()
        .map(|def| {
            let value = record.get(&def.name);
            let target = value.and_then(Value::as_link).map(|t| LinkTarget {
                target_id: t,
                target_class: store.get(t).map(|r| r.class.clone()).unwrap_or_default(),
                target_label: store.label(t),
            });
            AttributeEntry {
                attribute: def.name.clone(),
                value: match &target {
                    Some(t) => Some(t.target_label.clone()),
                    None => value.map(ToString::to_string),
                },
                is_link: def.is_link(),
                target,
            }
        })
        .collect();

    for group in store.incoming(focus)? {
        let members: Vec<ObjectId> = group
            .members
            .into_iter()
            .filter(|&m| session.is_visible(store, m))
            .collect();
        if members.is_empty() {
            continue;
        }
        let source_class = vocab.require_class(&group.class)?;
        let columns: Vec<String> = source_class.scalar_attributes().map(|a| a.name.clone()).collect();
        let rows = members
            .iter()
            .map(|&m| {
                let rec = store.require(m)?;
                Ok(MemberValues {
                    id: m,
                    values: columns.iter().map(|c| rec.get(c).map(ToString::to_string)).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        view.d4_context.push(ContextGroup {
            class: group.class.clone(),
            via_attribute: group.attribute.clone(),
            members: members.iter().map(|&m| entry(m)).collect(),
        });
        view.d5_group_attributes.push(GroupAttributes {
            class: group.class,
            via_attribute: group.attribute,
            columns,
            rows,
        });
    }
    Ok(view)
}
